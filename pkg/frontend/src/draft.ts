// Ballot draft state machine. The draft can never violate its rule snapshot:
// limited ballots refuse selections beyond the vote budget, and submission is
// only possible when the rule is exactly satisfied. Drafts persist in storage
// until the ballot is accepted.

import type { VotingRule } from "./api"

export interface RuleSnapshot {
    kind: VotingRule["kind"]
    votes_per_voter: number
}

export interface DraftState {
    session_id: string
    rule: RuleSnapshot
    selections: string[] // ordered by selection time
    submitted_receipt: string | null
}

export interface StorageLike {
    getItem(key: string): string | null
    setItem(key: string, value: string): void
    removeItem(key: string): void
}

const keyFor = (sessionId: string) => `trendvote-draft:${sessionId}`

export function newDraft(sessionId: string, rule: RuleSnapshot): DraftState {
    return {
        session_id: sessionId,
        rule: { kind: rule.kind, votes_per_voter: rule.votes_per_voter },
        selections: [],
        submitted_receipt: null,
    }
}

export function loadDraft(
    storage: StorageLike,
    sessionId: string,
    rule: RuleSnapshot,
    knownIds: string[],
): DraftState {
    const raw = storage.getItem(keyFor(sessionId))
    if (raw === null) {
        return newDraft(sessionId, rule)
    }
    try {
        const parsed = JSON.parse(raw) as DraftState
        if (
            parsed.rule.kind !== rule.kind ||
            parsed.rule.votes_per_voter !== rule.votes_per_voter
        ) {
            return newDraft(sessionId, rule) // rule changed server-side: start over
        }
        const known = new Set(knownIds)
        return {
            ...parsed,
            session_id: sessionId,
            selections: parsed.selections.filter((id) => known.has(id)),
        }
    } catch {
        return newDraft(sessionId, rule)
    }
}

export function saveDraft(storage: StorageLike, draft: DraftState): void {
    if (draft.submitted_receipt !== null) {
        storage.removeItem(keyFor(draft.session_id))
        return
    }
    storage.setItem(keyFor(draft.session_id), JSON.stringify(draft))
}

export function isSelected(draft: DraftState, candidateId: string): boolean {
    return draft.selections.includes(candidateId)
}

export function remainingVotes(draft: DraftState): number | null {
    if (draft.rule.kind !== "limited_exact") {
        return null
    }
    return draft.rule.votes_per_voter - draft.selections.length
}

/** Toggle a candidate. Returns the same draft when the action is not allowed. */
export function toggleSelection(draft: DraftState, candidateId: string): DraftState {
    if (draft.submitted_receipt !== null) {
        return draft
    }
    if (isSelected(draft, candidateId)) {
        return {
            ...draft,
            selections: draft.selections.filter((id) => id !== candidateId),
        }
    }
    if (
        draft.rule.kind === "limited_exact" &&
        draft.selections.length >= draft.rule.votes_per_voter
    ) {
        return draft // budget exhausted: deselect something first
    }
    return { ...draft, selections: [...draft.selections, candidateId] }
}

export function canSubmit(draft: DraftState): boolean {
    if (draft.submitted_receipt !== null) {
        return false
    }
    if (draft.rule.kind === "limited_exact") {
        return draft.selections.length === draft.rule.votes_per_voter
    }
    return draft.selections.length >= 1
}

export function markSubmitted(draft: DraftState, receipt: string): DraftState {
    return { ...draft, submitted_receipt: receipt }
}
