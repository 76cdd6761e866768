#include "sbp/parallel.hpp"

namespace sbp {

namespace {
std::atomic<unsigned> g_worker_cap{0};
}

void set_worker_cap(unsigned cap) { g_worker_cap.store(cap); }

unsigned worker_count() {
  const unsigned cap = g_worker_cap.load();
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (cap == 0) return hw;
  return std::min(cap, hw);
}

}  // namespace sbp
