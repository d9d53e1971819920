/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const fit_series: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const plane_fits_at: (a: number, b: number, c: number) => [number, number];
export const sample_error_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const __externref_table_alloc: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
