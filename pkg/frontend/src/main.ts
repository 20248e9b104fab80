// Browser bootstrap: reads ?session=<id> and binds the controller to the DOM.

import { BallotApi } from "./api"
import { BallotApp } from "./app"

const params = new URLSearchParams(window.location.search)
const sessionId = params.get("session") ?? ""
const baseUrl = params.get("api") ?? ""
const tokenKey = "trendvote-token"

const api = new BallotApi(baseUrl, window.localStorage.getItem(tokenKey) ?? "")
const app = new BallotApp(api, window.localStorage, sessionId)
const root = document.getElementById("app") as HTMLElement

function rerender(): void {
    root.innerHTML = app.html()
}

root.addEventListener("change", (event) => {
    const target = event.target as HTMLElement
    const id = target.getAttribute("data-id")
    if (id !== null) {
        app.toggle(id)
        rerender()
    }
})

root.addEventListener("input", (event) => {
    const target = event.target as HTMLInputElement
    if (target.id === "search") {
        app.setQuery(target.value)
        const cursor = target.selectionStart
        rerender()
        const again = document.getElementById("search") as HTMLInputElement
        again.focus()
        again.setSelectionRange(cursor, cursor)
    }
})

root.addEventListener("click", async (event) => {
    const target = event.target as HTMLElement
    if (target.id === "submit-ballot") {
        await app.submit()
        rerender()
    } else if (target.id === "retry") {
        await app.retry()
        rerender()
    }
})

root.addEventListener("submit", async (event) => {
    const target = event.target as HTMLElement
    if (target.id === "sign-in") {
        event.preventDefault()
        const token = (document.getElementById("token") as HTMLInputElement).value
        window.localStorage.setItem(tokenKey, token)
        await app.signIn(token)
        rerender()
    }
})

if (sessionId === "") {
    root.innerHTML = "<p>Missing ?session=&lt;id&gt; in the URL.</p>"
} else {
    app.load().then(rerender)
}
