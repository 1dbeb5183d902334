#pragma once

// Data-parallel kernels come in two flavours: a plain serial loop kept as the
// reference, and an OpenMP version used by default. Both must produce
// identical results; tests and the benchmark compare them.

namespace itopics {

enum class Exec { serial, parallel };

int max_threads() noexcept;
void set_num_threads(int n) noexcept;

}  // namespace itopics
