#pragma once

#include <cstddef>
#include <functional>

namespace specaudit {

/// Environment variable read for the worker count.
inline constexpr const char* kThreadsEnv = "SPECAUDIT_THREADS";

/// Number of worker threads used by parallel loops. Reads SPECAUDIT_THREADS on
/// every call (falls back to std::thread::hardware_concurrency()).
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Indices are split into contiguous chunks, one
/// per worker. Callers must write results to per-index slots only; under that
/// rule the output does not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace specaudit
