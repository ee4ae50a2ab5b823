#include <benchmark/benchmark.h>

// The distro's static benchmark_main archive carries LTO bytecode from another
// compiler patch level, so main comes from here instead.
BENCHMARK_MAIN();
