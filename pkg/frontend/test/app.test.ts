import { describe, expect, it } from "vitest"

import { BallotApi } from "../src/api"
import { BallotApp } from "../src/app"
import type { StorageLike } from "../src/draft"

class MemoryStorage implements StorageLike {
    private map = new Map<string, string>()
    getItem(key: string) {
        return this.map.get(key) ?? null
    }
    setItem(key: string, value: string) {
        this.map.set(key, value)
    }
    removeItem(key: string) {
        this.map.delete(key)
    }
}

const SERVER_ORDER = ["c3", "c1", "c2", "c4"]

interface StubOptions {
    status?: "open" | "closed"
    votes?: number
    rejectReason?: string
    failSubmits?: number
    validTokens?: string[]
}

/** A scripted stand-in for the ballot service. */
function stubFetch(options: StubOptions = {}) {
    const status = options.status ?? "open"
    const votes = options.votes ?? 2
    const valid = options.validTokens ?? ["tok-good"]
    const state = { submits: 0, ballots: [] as string[][] }

    const impl = async (input: string, init?: RequestInit): Promise<Response> => {
        const headers = (init?.headers ?? {}) as Record<string, string>
        const token = (headers["Authorization"] ?? "").replace("Bearer ", "")
        if (!valid.includes(token)) {
            return new Response(JSON.stringify({ detail: "unknown token" }), { status: 401 })
        }
        if (input.endsWith("/candidates")) {
            return new Response(
                JSON.stringify({
                    session_id: "s1",
                    status,
                    rule: {
                        kind: "limited_exact",
                        votes_per_voter: votes,
                        weight_human: 7,
                        weight_ai: 1,
                        advance_count: 10,
                        induct_count: 2,
                    },
                    candidates: SERVER_ORDER.map((id) => ({
                        candidate_id: id,
                        text: `Candidate ${id}`,
                    })),
                }),
                { status: 200 },
            )
        }
        if (input.endsWith("/ballots")) {
            state.submits += 1
            if (options.failSubmits !== undefined && state.submits <= options.failSubmits) {
                throw new TypeError("fetch failed")
            }
            if (options.rejectReason !== undefined) {
                return new Response(
                    JSON.stringify({ accepted: false, reason: options.rejectReason }),
                    { status: 200 },
                )
            }
            const body = JSON.parse(String(init?.body)) as { selections: string[] }
            state.ballots.push(body.selections)
            return new Response(
                JSON.stringify({ accepted: true, receipt: "r-123" }),
                { status: 200 },
            )
        }
        if (input.endsWith("/tally")) {
            if (status === "open") {
                return new Response(JSON.stringify({ detail: "open" }), { status: 409 })
            }
            return new Response(
                JSON.stringify({
                    session_id: "s1",
                    turnout: { human: 1, ai: 0 },
                    rows: [
                        {
                            candidate_id: "c3", raw_human: 1, raw_ai: 0,
                            weighted_score: 7, final_rank: 1,
                            advanced: true, inducted: true,
                        },
                    ],
                }),
                { status: 200 },
            )
        }
        return new Response("not found", { status: 404 })
    }
    return { impl, state }
}

function makeApp(options: StubOptions = {}, token = "tok-good") {
    const { impl, state } = stubFetch(options)
    const storage = new MemoryStorage()
    const api = new BallotApi("http://stub", token, impl)
    const app = new BallotApp(api, storage, "s1")
    return { app, storage, state }
}

describe("ballot app controller", () => {
    it("renders candidates in server order after load", async () => {
        const { app } = makeApp()
        await app.load()
        const html = app.html()
        const order = [...html.matchAll(/<li[^>]*data-id="([^"]+)"/g)].map((m) => m[1])
        expect(order).toEqual(SERVER_ORDER)
        expect(html).toContain("2 remaining")
    })

    it("surfaces the server rejection reason verbatim and keeps the draft", async () => {
        const { app } = makeApp({ rejectReason: "duplicate voter" })
        await app.load()
        app.toggle("c3")
        app.toggle("c1")
        await app.submit()
        expect(app.html()).toContain("Ballot rejected: duplicate voter")
        expect(app.draft?.selections).toEqual(["c3", "c1"])
        expect(app.draft?.submitted_receipt).toBeNull()
    })

    it("locks the view with a receipt after acceptance", async () => {
        const { app, state } = makeApp()
        await app.load()
        app.toggle("c1")
        app.toggle("c4")
        await app.submit()
        expect(state.ballots).toEqual([["c1", "c4"]])
        const html = app.html()
        expect(html).toContain("Ballot accepted")
        expect(html).toContain("r-123")
        expect(html).not.toContain("<button id=\"submit-ballot\"")
    })

    it("never posts when the client-side gate is unsatisfied", async () => {
        const { app, state } = makeApp()
        await app.load()
        app.toggle("c1") // 1 of 2 required
        await app.submit()
        expect(state.submits).toBe(0)
        expect(app.html()).toContain("1 remaining")
    })

    it("prompts for sign-in on 401 and recovers after sign-in", async () => {
        const { app } = makeApp({}, "tok-wrong")
        await app.load()
        expect(app.view.kind).toBe("signin")
        expect(app.html()).toContain("sign-in")
        await app.signIn("tok-good")
        expect(app.view.kind).toBe("ballot")
    })

    it("shows the read-only tally view for a closed session", async () => {
        const { app } = makeApp({ status: "closed" })
        await app.load()
        expect(app.view.kind).toBe("tally")
        const html = app.html()
        expect(html).toContain("Results")
        expect(html).not.toContain("submit-ballot")
    })

    it("offers retry on network failure and preserves the draft", async () => {
        const { app, storage } = makeApp({ failSubmits: 1 })
        await app.load()
        app.toggle("c3")
        app.toggle("c2")
        await app.submit()
        expect(app.view.kind).toBe("retry")
        expect(app.html()).toContain("Retry")
        // the draft survived in storage and is restored on reload
        await app.retry()
        expect(app.view.kind).toBe("ballot")
        expect(app.draft?.selections).toEqual(["c3", "c2"])
        await app.submit()
        expect(app.html()).toContain("Ballot accepted")
        expect(storage.getItem("trendvote-draft:s1")).toBeNull()
    })
})
