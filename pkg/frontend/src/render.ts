// Pure HTML renderers. No DOM access here, so every view is testable as a
// string; the app shell wires the strings into the document.

import type { CandidateEntry, SessionView, TallyView } from "./api"
import { canSubmit, DraftState, isSelected, remainingVotes } from "./draft"

export function escapeHtml(text: string): string {
    return text
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;")
}

export function ruleText(session: SessionView): string {
    if (session.rule.kind === "limited_exact") {
        return `Distribute exactly ${session.rule.votes_per_voter} votes.`
    }
    return "Approve any number of candidates, at least one."
}

export function counterText(draft: DraftState): string {
    const remaining = remainingVotes(draft)
    if (remaining === null) {
        return `${draft.selections.length} approved`
    }
    return `${remaining} remaining`
}

/**
 * Candidate rows in the exact server presentation order. A search query hides
 * non-matching rows but never reorders the visible ones.
 */
export function renderCandidates(
    candidates: CandidateEntry[],
    draft: DraftState,
    query = "",
): string {
    const q = query.trim().toLowerCase()
    const rows = candidates.map((candidate) => {
        const hidden = q !== "" && !candidate.text.toLowerCase().includes(q)
        const selected = isSelected(draft, candidate.candidate_id)
        return (
            `<li class="candidate${selected ? " selected" : ""}"` +
            `${hidden ? ' style="display:none"' : ""} data-id="${candidate.candidate_id}">` +
            `<label><input type="checkbox" data-id="${candidate.candidate_id}"` +
            `${selected ? " checked" : ""}${draft.submitted_receipt ? " disabled" : ""}/> ` +
            `${escapeHtml(candidate.text)}</label></li>`
        )
    })
    return `<ol class="candidates">${rows.join("")}</ol>`
}

export function renderControls(draft: DraftState, error: string | null): string {
    const disabled = canSubmit(draft) ? "" : " disabled"
    const banner = error === null
        ? ""
        : `<p class="error" role="alert">Ballot rejected: ${escapeHtml(error)}</p>`
    if (draft.submitted_receipt !== null) {
        return (
            `<p class="confirmation">Ballot accepted. ` +
            `Receipt <code>${escapeHtml(draft.submitted_receipt)}</code></p>`
        )
    }
    return (
        banner +
        `<p class="counter">${counterText(draft)}</p>` +
        `<button id="submit-ballot"${disabled}>Submit ballot</button>`
    )
}

export function renderTally(tally: TallyView): string {
    const rows = tally.rows
        .map(
            (row) =>
                `<tr${row.inducted ? ' class="inducted"' : ""}>` +
                `<td>${row.final_rank}</td>` +
                `<td><code>${row.candidate_id}</code></td>` +
                `<td>${row.raw_human}</td><td>${row.raw_ai}</td>` +
                `<td>${row.weighted_score}</td></tr>`,
        )
        .join("")
    return (
        `<table class="tally"><thead><tr>` +
        `<th>rank</th><th>candidate</th><th>human</th><th>ai</th><th>weighted</th>` +
        `</tr></thead><tbody>${rows}</tbody></table>`
    )
}

export function renderSignIn(): string {
    return (
        `<form id="sign-in"><label>Access token ` +
        `<input id="token" type="password" autocomplete="off"/></label>` +
        `<button type="submit">Sign in</button></form>`
    )
}

export function renderRetry(message: string): string {
    return (
        `<p class="error" role="alert">${escapeHtml(message)}</p>` +
        `<button id="retry">Retry</button>`
    )
}
