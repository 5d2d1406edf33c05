export * from "./events.js";
export * from "./store.js";
export * from "./view.js";
export * from "./actions.js";
export * from "./client.js";
export * from "./console.js";
