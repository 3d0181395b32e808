#pragma once

#include <cstddef>
#include <functional>

namespace dichotomy {

/// Worker count: hardware concurrency, capped by the DICHOTOMY_THREADS
/// environment variable when it holds a positive integer.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Indices are
/// handed out dynamically; an exception thrown by a call is rethrown
/// after all workers have stopped (the one with the lowest index among
/// those that ran).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dichotomy
