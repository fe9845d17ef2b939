/* tslint:disable */
/* eslint-disable */

/**
 * Endpoint errors of RK4 and the discrete stepper on the heavy top against
 * a fine RK4 reference. Rows: `h, RK4 error, discrete error`.
 */
export function convergence(retraction: string): Float64Array;

/**
 * Plans a path from `(−2, start_y, 0)` to `(2, goal_y, 0)` around the unit
 * obstacle, passing below it when `detour < 0` and above otherwise.
 * Rows: `x, y, θ, barrier gap`.
 */
export function plan_around_obstacle(kappa: number, start_y: number, goal_y: number, detour: number): Float64Array;

/**
 * Heavy top released with body angular velocity `omega` from a tilt about
 * the body x axis. Rows: `t, α₁, α₂, α₃, energy − energy(0)`.
 */
export function spin_heavy_top(mass: number, omega: Float64Array, tilt: number, horizon: number, h: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly convergence: (a: number, b: number) => [number, number, number, number];
    readonly plan_around_obstacle: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly spin_heavy_top: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
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
