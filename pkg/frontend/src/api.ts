// Typed client for the ballot service HTTP API.

export interface VotingRule {
    kind: "approval_unlimited" | "limited_exact"
    votes_per_voter: number
    weight_human: number
    weight_ai: number
    advance_count: number
    induct_count: number
}

export interface CandidateEntry {
    candidate_id: string
    text: string
}

export interface SessionView {
    session_id: string
    rule: VotingRule
    status: "open" | "closed"
    candidates: CandidateEntry[]
}

export type BallotOutcome =
    | { accepted: true; receipt: string }
    | { accepted: false; reason: string }

export interface TallyRowView {
    candidate_id: string
    raw_human: number
    raw_ai: number
    weighted_score: number
    final_rank: number
    advanced: boolean
    inducted: boolean
}

export interface TallyView {
    session_id: string
    rows: TallyRowView[]
    turnout: Record<string, number>
}

export class AuthError extends Error {}
export class NetworkError extends Error {}
export class ApiError extends Error {
    constructor(message: string, readonly status: number) {
        super(message)
    }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export class BallotApi {
    constructor(
        private readonly baseUrl: string,
        private token: string,
        private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
    ) {}

    setToken(token: string) {
        this.token = token
    }

    private async request(path: string, init?: RequestInit): Promise<Response> {
        let response: Response
        try {
            response = await this.fetchImpl(`${this.baseUrl}${path}`, {
                ...init,
                headers: {
                    ...(init?.headers ?? {}),
                    Authorization: `Bearer ${this.token}`,
                    "Content-Type": "application/json",
                },
            })
        } catch (error) {
            throw new NetworkError(`network failure: ${error}`)
        }
        if (response.status === 401) {
            throw new AuthError("sign-in required")
        }
        return response
    }

    async loadSession(sessionId: string): Promise<SessionView> {
        const response = await this.request(`/sessions/${sessionId}/candidates`)
        if (!response.ok) {
            throw new ApiError(await response.text(), response.status)
        }
        return (await response.json()) as SessionView
    }

    async submitBallot(sessionId: string, selections: string[]): Promise<BallotOutcome> {
        const response = await this.request(`/sessions/${sessionId}/ballots`, {
            method: "POST",
            body: JSON.stringify({ selections }),
        })
        if (!response.ok) {
            throw new ApiError(await response.text(), response.status)
        }
        return (await response.json()) as BallotOutcome
    }

    async loadTally(sessionId: string): Promise<TallyView | null> {
        const response = await this.request(`/sessions/${sessionId}/tally`)
        if (response.status === 409) {
            return null // still open
        }
        if (!response.ok) {
            throw new ApiError(await response.text(), response.status)
        }
        return (await response.json()) as TallyView
    }
}
