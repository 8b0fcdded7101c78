#ifndef DSENH_RUNTIME_HPP
#define DSENH_RUNTIME_HPP

namespace dsenh {

// Keeps multi-megabyte layer scratch buffers on the heap instead of
// per-call mmap/munmap round trips. Call once at process start.
void apply_malloc_tuning();

}  // namespace dsenh

#endif
