#pragma once

#include <cstddef>
#include <functional>

namespace dav {

/// Default number of workers: DAVLAB_WORKERS from the environment if set,
/// otherwise hardware concurrency. Overridable at runtime (CLI --workers).
int default_worker_count();
void set_default_worker_count(int workers);

/// Run body(begin, end) over [0, n) split into contiguous static chunks,
/// one per worker. The split depends only on (n, workers), never on
/// scheduling, so per-index outputs are reproducible; callers must do any
/// floating-point reductions in index order afterwards.
void parallel_chunks(std::size_t n, int workers,
                     const std::function<void(std::size_t, std::size_t)>& body);

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

}  // namespace dav
