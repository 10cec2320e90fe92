/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_simulation_free: (a: number, b: number) => void;
export const front_profile: (a: number, b: number) => [number, number, number, number];
export const simulation_advance: (a: number, b: number) => [number, number];
export const simulation_error: (a: number) => number;
export const simulation_field: (a: number) => [number, number];
export const simulation_front: (a: number) => [number, number];
export const simulation_new: (a: number, b: number) => [number, number, number];
export const simulation_speed: (a: number) => number;
export const simulation_time: (a: number) => number;
export const simulation_xi: (a: number) => [number, number];
export const wave_speed: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
