// View controller: pure state transitions over the API client and draft
// machine. The DOM shell only re-renders `html()` and forwards events.

import { AuthError, BallotApi, NetworkError, SessionView, TallyView } from "./api"
import {
    canSubmit,
    DraftState,
    loadDraft,
    markSubmitted,
    saveDraft,
    StorageLike,
    toggleSelection,
} from "./draft"
import {
    renderCandidates,
    renderControls,
    renderRetry,
    renderSignIn,
    renderTally,
    ruleText,
} from "./render"

export type View =
    | { kind: "loading" }
    | { kind: "signin"; message: string }
    | { kind: "ballot"; session: SessionView; error: string | null; query: string }
    | { kind: "tally"; session: SessionView; tally: TallyView | null }
    | { kind: "retry"; message: string }

export class BallotApp {
    view: View = { kind: "loading" }
    draft: DraftState | null = null

    constructor(
        private readonly api: BallotApi,
        private readonly storage: StorageLike,
        private readonly sessionId: string,
    ) {}

    async load(): Promise<void> {
        try {
            const session = await this.api.loadSession(this.sessionId)
            if (session.status === "closed") {
                const tally = await this.api.loadTally(this.sessionId)
                this.view = { kind: "tally", session, tally }
                return
            }
            this.draft = loadDraft(
                this.storage,
                this.sessionId,
                session.rule,
                session.candidates.map((c) => c.candidate_id),
            )
            this.view = { kind: "ballot", session, error: null, query: "" }
        } catch (error) {
            if (error instanceof AuthError) {
                this.view = { kind: "signin", message: "Sign in to vote." }
            } else if (error instanceof NetworkError) {
                this.view = { kind: "retry", message: "Could not reach the ballot service." }
            } else {
                this.view = { kind: "retry", message: String(error) }
            }
        }
    }

    signIn(token: string): Promise<void> {
        this.api.setToken(token)
        this.view = { kind: "loading" }
        return this.load()
    }

    toggle(candidateId: string): void {
        if (this.view.kind !== "ballot" || this.draft === null) {
            return
        }
        this.draft = toggleSelection(this.draft, candidateId)
        saveDraft(this.storage, this.draft)
    }

    setQuery(query: string): void {
        if (this.view.kind === "ballot") {
            this.view = { ...this.view, query }
        }
    }

    async submit(): Promise<void> {
        if (this.view.kind !== "ballot" || this.draft === null) {
            return
        }
        if (!canSubmit(this.draft)) {
            return // client-side gate mirrors the server rule
        }
        try {
            const outcome = await this.api.submitBallot(this.sessionId, this.draft.selections)
            if (outcome.accepted) {
                this.draft = markSubmitted(this.draft, outcome.receipt)
                saveDraft(this.storage, this.draft)
                this.view = { ...this.view, error: null }
            } else {
                // surface the server reason verbatim; the draft is untouched
                this.view = { ...this.view, error: outcome.reason }
            }
        } catch (error) {
            if (error instanceof NetworkError) {
                this.view = { kind: "retry", message: "Submission failed: network error." }
            } else {
                throw error
            }
        }
    }

    async retry(): Promise<void> {
        this.view = { kind: "loading" }
        await this.load()
    }

    html(): string {
        const view = this.view
        switch (view.kind) {
            case "loading":
                return `<p>Loading session…</p>`
            case "signin":
                return `<p>${view.message}</p>` + renderSignIn()
            case "retry":
                return renderRetry(view.message)
            case "tally": {
                const table =
                    view.tally === null
                        ? `<p>The session is closed; the tally is being prepared.</p>`
                        : renderTally(view.tally)
                return `<h2>Results</h2>` + table
            }
            case "ballot": {
                const draft = this.draft as DraftState
                return (
                    `<p class="rule">${ruleText(view.session)}</p>` +
                    `<input id="search" type="search" placeholder="filter candidates" ` +
                    `value="${view.query.replace(/"/g, "&quot;")}"/>` +
                    renderCandidates(view.session.candidates, draft, view.query) +
                    renderControls(draft, view.error)
                )
            }
        }
    }
}
