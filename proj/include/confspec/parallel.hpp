#pragma once

namespace confspec {

/// Selects the OpenMP kernel or its serial reference twin. Both produce
/// bitwise-identical output: parallel loops never split a reduction.
enum class Exec { Serial, Parallel };

/// Applies CONFSPEC_THREADS (if set and positive) to the OpenMP runtime.
/// Returns the thread count in effect afterwards.
int configure_threads_from_env();

int max_threads();

}  // namespace confspec
