/* tslint:disable */
/* eslint-disable */

/**
 * One run of queries on a model, sampled with a fixed seed.
 */
export class Lab {
    free(): void;
    [Symbol.dispose](): void;
    history(): string;
    /**
     * Rendered outcome, e.g. `full/empty`.
     */
    measure(side: string, target: string): string;
    constructor(model: string, seed: number);
    stuck(): boolean;
}

/**
 * Boxes a model lets one query open, for greying out buttons.
 */
export function admissible(model: string, side: string): string;

export function gap(p1: string, p2: string, p3: string): string;

export function pr_box(model: string, bits: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_lab_free: (a: number, b: number) => void;
    readonly admissible: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly gap: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly lab_history: (a: number) => [number, number];
    readonly lab_measure: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly lab_new: (a: number, b: number, c: number) => [number, number, number];
    readonly lab_stuck: (a: number) => number;
    readonly pr_box: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
