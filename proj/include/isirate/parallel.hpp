#pragma once

namespace isirate {

// Applies the ISIRL_THREADS cap (if set) to OpenMP and returns the thread count in use.
int configure_threads();
int thread_count();

}  // namespace isirate
