/* tslint:disable */
/* eslint-disable */

/**
 * Fixed point `c(α)` for `W` with spectrum `lambdas`, at each of `alphas`.
 *
 * Layout: `[c; k] ++ [c'; k] ++ [residual; k]` for `k = alphas.len()`.
 */
export function fixed_point_curve(lambdas: Float64Array, gamma: number, alphas: Float64Array): Float64Array;

/**
 * A small Monte Carlo run at one `d` with the DCT relation.
 *
 * Layout: `[mean, stderr, analytic]` for mltn, ridge and tl in that order;
 * missing values are NaN.
 */
export function monte_carlo_point(n: number, n_tilde: number, d: number, sigma_eps2: number, sigma_eta2: number, sigma_xi2: number, trials: number, seed: bigint): Float64Array;

/**
 * Limiting risks at `points` log-spaced values of `d/n` in `[1/8, 8]`,
 * orthonormal relation, isotropic features.
 *
 * Layout: `[x; points] ++ [mltn; points] ++ [ridge; points] ++ [tl; points]`,
 * with `+∞` on the interpolation bands.
 */
export function risk_curves(n: number, n_tilde: number, sigma_eps2: number, sigma_eta2: number, sigma_xi2: number, b: number, points: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly fixed_point_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly monte_carlo_point: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number, number];
    readonly risk_curves: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
