/* tslint:disable */
/* eslint-disable */

/**
 * Fits `λ1 e^{kt} + λ2` and returns the report with the data and the
 * fitted curve attached.
 */
export function fit_series(series: string, norm: string, mesh: number): string;

/**
 * Least-squares and minimax fits at one fixed rate, with both curves
 * evaluated at the observation times and the data attached.
 */
export function plane_fits_at(series: string, k: number): string;

/**
 * Samples the error function on the default rate interval as
 * `{"k": [...], "error": [...]}`.
 */
export function sample_error_curve(series: string, norm: string, samples: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly fit_series: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly plane_fits_at: (a: number, b: number, c: number) => [number, number];
    readonly sample_error_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly __externref_table_alloc: () => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
