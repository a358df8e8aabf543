/* tslint:disable */
/* eslint-disable */

export function barrier(v0_ev: number, work_function_ev: number, f_dc_gvm: number): Float64Array;

export function fn_ratio_curve(f_laser_gvm: number, b_gvm: number, dc_min_gvm: number, dc_max_gvm: number, n: number): Float64Array;

export function potential_curve(v0_ev: number, work_function_ev: number, f_dc_gvm: number, z_max_nm: number, n: number): Float64Array;

export function surrogate_iac(f_laser_gvm: number, f_dc_gvm: number, tau_fs: number, phi_rad: number, b_gvm: number, max_delay_fs: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly barrier: (a: number, b: number, c: number) => [number, number, number, number];
    readonly fn_ratio_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly potential_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly surrogate_iac: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
