#pragma once

namespace damarl {

/// Raises glibc's mmap and trim thresholds so the large per-step matrix
/// temporaries are reused from the heap instead of being mapped and unmapped
/// on every allocation. No-op on other C libraries.
void tune_allocator();

} // namespace damarl
