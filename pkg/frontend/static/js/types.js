/** Wire types mirroring the survey service's JSON payloads. */
export function initialState() {
    return {
        answers: {},
        workerId: "",
        touched: {},
        outcomes: {},
        submitState: "idle",
        networkError: null,
    };
}
