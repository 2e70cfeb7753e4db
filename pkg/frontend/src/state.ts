/**
 * View state: which corpus, which mode, which prompts.
 *
 * The mode fixes the prompt arity (search and map take one concept,
 * scatter takes two); transitions keep that invariant so views can
 * render as pure functions of the state plus the last service payload.
 */

export type Mode = "search" | "scatter" | "map";

export type Selection =
  | { kind: "image"; id: string }
  | { kind: "cell"; row: number; col: number };

export interface ViewState {
  corpus: string | null;
  mode: Mode;
  prompts: string[];
  normalization: "none" | "rank" | "zscore";
  selection: Selection | null;
}

export function promptArity(mode: Mode): 1 | 2 {
  return mode === "scatter" ? 2 : 1;
}

export function initialState(): ViewState {
  return {
    corpus: null,
    mode: "search",
    prompts: [""],
    normalization: "none",
    selection: null,
  };
}

export function setMode(state: ViewState, mode: Mode): ViewState {
  const arity = promptArity(mode);
  const prompts = state.prompts.slice(0, arity);
  while (prompts.length < arity) prompts.push("");
  return { ...state, mode, prompts, selection: null };
}

export function setCorpus(state: ViewState, corpus: string): ViewState {
  return { ...state, corpus, selection: null };
}

export function setPrompt(state: ViewState, index: number, text: string): ViewState {
  if (index >= promptArity(state.mode)) {
    throw new Error(`prompt index ${index} out of range for ${state.mode}`);
  }
  const prompts = state.prompts.slice();
  prompts[index] = text;
  return { ...state, prompts };
}

export function swapPrompts(state: ViewState): ViewState {
  if (state.prompts.length !== 2) return state;
  return { ...state, prompts: [state.prompts[1], state.prompts[0]] };
}

export function select(state: ViewState, selection: Selection | null): ViewState {
  return { ...state, selection };
}

export function checkInvariants(state: ViewState): void {
  if (state.prompts.length !== promptArity(state.mode)) {
    throw new Error(
      `mode ${state.mode} expects ${promptArity(state.mode)} prompts, ` +
        `got ${state.prompts.length}`,
    );
  }
}
