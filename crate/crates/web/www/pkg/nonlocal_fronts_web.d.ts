/* tslint:disable */
/* eslint-disable */

/**
 * Perturbed front evolving in the frame moving with the front.
 */
export class Simulation {
    free(): void;
    [Symbol.dispose](): void;
    advance(steps: number): void;
    /**
     * `sup |u - phi|` over the window.
     */
    error(): number;
    field(): Float64Array;
    front(): Float64Array;
    constructor(params: string);
    speed(): number;
    time(): number;
    /**
     * Moving-frame coordinates `x1 + c t` of the grid nodes.
     */
    xi(): Float64Array;
}

/**
 * Front profile at `factor c*`, subsampled to about 400 points, as JSON.
 */
export function front_profile(params: string): string;

/**
 * `G_c` and `H_c` with the critical pair, as JSON.
 */
export function wave_speed(params: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_simulation_free: (a: number, b: number) => void;
    readonly front_profile: (a: number, b: number) => [number, number, number, number];
    readonly simulation_advance: (a: number, b: number) => [number, number];
    readonly simulation_error: (a: number) => number;
    readonly simulation_field: (a: number) => [number, number];
    readonly simulation_front: (a: number) => [number, number];
    readonly simulation_new: (a: number, b: number) => [number, number, number];
    readonly simulation_speed: (a: number) => number;
    readonly simulation_time: (a: number) => number;
    readonly simulation_xi: (a: number) => [number, number];
    readonly wave_speed: (a: number, b: number) => [number, number, number, number];
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
