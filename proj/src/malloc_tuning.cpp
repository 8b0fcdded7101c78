#include "dsenh/runtime.hpp"

#include <malloc.h>

namespace dsenh {

void apply_malloc_tuning() {
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
}

}  // namespace dsenh
