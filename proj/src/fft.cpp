#include "wk/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace wk {

int& thread_count() {
  static int n = 1;
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  int nt = thread_count();
  if (nt == 0) nt = static_cast<int>(std::thread::hardware_concurrency());
  if (nt <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  nt = std::min<std::size_t>(nt, n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::size_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

namespace {

std::mutex plan_mutex;

// FFTW planner is not thread-safe; execution of a cached plan on new arrays is.
fftw_plan get_plan(int n, int howmany, int stride, int dist, int sign) {
  static std::map<std::tuple<int, int, int, int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_tuple(n, howmany, stride, dist, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cplx> buf(static_cast<std::size_t>(dist) * howmany + static_cast<std::size_t>(stride) * n + 1);
  fftw_complex* p = reinterpret_cast<fftw_complex*>(buf.data());
  int nn[1] = {n};
  fftw_plan plan = fftw_plan_many_dft(1, nn, howmany, p, nullptr, stride, dist, p, nullptr,
                                      stride, dist, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache[key] = plan;
  return plan;
}

void exec(fftw_plan plan, cplx* data) {
  fftw_complex* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, p, p);
}

}  // namespace

void fft_unitary(NdArray& a, const std::vector<int>& axes, int sign) {
  const auto& shape = a.shape();
  for (int ax : axes) {
    if (ax < 0 || ax >= a.rank()) throw GridError("fft axis out of range");
    int n = shape[ax];
    std::size_t stride = a.stride(ax);
    // iterate over all lines along `ax`
    std::size_t nlines = a.size() / n;
    // group lines into contiguous batches where possible
    std::size_t inner = stride;              // lines with consecutive start offsets within a block
    std::size_t block = stride * static_cast<std::size_t>(n);
    std::size_t nblocks = a.size() / block;
    fftw_plan plan = get_plan(n, static_cast<int>(inner), static_cast<int>(stride), 1,
                              sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
    for (std::size_t b = 0; b < nblocks; ++b) exec(plan, a.data() + b * block);
    double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= s;
    (void)nlines;
  }
}

void fft_rows_backward(cplx* data, int n, int howmany) {
  fftw_plan plan = get_plan(n, howmany, 1, n, FFTW_BACKWARD);
  exec(plan, data);
}

void fft_rows_forward(cplx* data, int n, int howmany) {
  fftw_plan plan = get_plan(n, howmany, 1, n, FFTW_FORWARD);
  exec(plan, data);
}

}  // namespace wk
