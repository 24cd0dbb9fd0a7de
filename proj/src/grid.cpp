#include "wk/grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace wk {

namespace {
bool power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }
}  // namespace

GridSpec make_grid(int d, int n, double L_x) {
  if (d < 1) throw GridError("make_grid: d must be >= 1");
  if (n < 4 || !power_of_two(n)) throw GridError("make_grid: n must be a power of two >= 4");
  if (!(L_x > 0)) throw GridError("make_grid: L_x must be positive");
  GridSpec g;
  g.d = d;
  g.n = n;
  g.L_x = L_x;
  g.L_v = n * kPi / (2.0 * L_x);  // velocity nodes = duals of the relative axis
  return g;
}

GridSpec make_grid(int d, int n, double L_x, double L_v) {
  GridSpec g = make_grid(d, n, L_x);
  if (!(L_v > 0)) throw GridError("make_grid: L_v must be positive");
  if (std::abs(L_v - g.L_v) > 1e-12 * g.L_v)
    throw GridError("make_grid: L_v does not match the dual lattice n*pi/(2*L_x)");
  return g;
}

GridSpec make_grid_balanced(int d, int n) {
  return make_grid(d, n, std::sqrt(n * kPi / 2.0));
}

double PhaseField::imag_residual() const {
  double m = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) m = std::max(m, std::abs(data[i].imag()));
  return m;
}

void PhaseField::set_real_flag(double tol) {
  real_flag = imag_residual() <= tol * std::max(1e-300, data.max_abs());
}

NdArray dft(const NdArray& a, const std::vector<int>& axes, FftDir dir) {
  NdArray out = a;
  fft_unitary(out, axes, dir == FftDir::Forward ? -1 : +1);
  return out;
}

SpectralField to_spectral(const DensityMatrix& g) {
  std::vector<int> axes(g.data.rank());
  for (int i = 0; i < g.data.rank(); ++i) axes[i] = i;
  SpectralField s;
  s.grid = g.grid;
  s.k = g.k;
  s.data = dft(g.data, axes, FftDir::Forward);
  return s;
}

DensityMatrix from_spectral(const SpectralField& s) {
  std::vector<int> axes(s.data.rank());
  for (int i = 0; i < s.data.rank(); ++i) axes[i] = i;
  DensityMatrix g(s.grid, s.k);
  g.data = dft(s.data, axes, FftDir::Backward);
  return g;
}

Moments moments(const PhaseField& f) {
  const GridSpec& g = f.grid;
  const int d = g.d, n = g.n;
  double cell = std::pow(g.dx(), d) * std::pow(g.dv(), d);
  cplx mass{0, 0}, energy{0, 0};
  std::vector<cplx> mom(d, cplx{0, 0});
  std::vector<int> idx(2 * d, 0);
  for (std::size_t flat = 0; flat < f.data.size(); ++flat) {
    double v2 = 0.0;
    cplx val = f.data[flat];
    mass += val;
    for (int a = 0; a < d; ++a) {
      double vv = g.v(idx[d + a]);
      mom[a] += vv * val;
      v2 += vv * vv;
    }
    energy += v2 * val;
    for (int a = 2 * d - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  Moments m;
  m.mass = mass.real() * cell;
  m.energy = energy.real() * cell;
  m.momentum.resize(d);
  double resid = std::abs(mass.imag());
  for (int a = 0; a < d; ++a) {
    m.momentum[a] = mom[a].real() * cell;
    resid = std::max(resid, std::abs(mom[a].imag()));
  }
  resid = std::max(resid, std::abs(energy.imag()));
  m.complex_residual = resid * cell;
  return m;
}

cplx LazyTensorState::eval(const std::vector<int>& X_idx, const std::vector<int>& Xp_idx) const {
  if (!factors.empty()) {
    const int d = factors[0].grid.d;
    cplx prod{1.0, 0.0};
    std::vector<int> idx(2 * d);
    for (int p = 0; p < k; ++p) {
      for (int a = 0; a < d; ++a) {
        idx[a] = X_idx[p * d + a];
        idx[d + a] = Xp_idx[p * d + a];
      }
      prod *= factors[p].data.at(idx);
    }
    return prod;
  }
  const GridSpec* g = nullptr;
  (void)g;
  // kernel path: convert indices to coordinates is the caller's job; here the
  // callable receives node coordinates directly.
  throw GridError("LazyTensorState: kernel states are evaluated via eval_at");
}

namespace {

void write_sidecar(const std::string& path, const std::map<std::string, std::string>& kv) {
  std::ofstream out(path + ".meta");
  for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

std::map<std::string, std::string> read_sidecar(const std::string& path) {
  std::ifstream in(path + ".meta");
  if (!in) throw GridError("missing sidecar: " + path + ".meta");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

void write_raw(const NdArray& a, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  for (std::size_t i = 0; i < a.size(); ++i) {
    double re = a[i].real(), im = a[i].imag();
    out.write(reinterpret_cast<const char*>(&re), 8);
    out.write(reinterpret_cast<const char*>(&im), 8);
  }
}

void read_raw(NdArray& a, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GridError("cannot open field file: " + path);
  for (std::size_t i = 0; i < a.size(); ++i) {
    double re, im;
    in.read(reinterpret_cast<char*>(&re), 8);
    in.read(reinterpret_cast<char*>(&im), 8);
    a[i] = cplx{re, im};
  }
  if (!in) throw GridError("field file truncated: " + path);
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void save_phase_field(const PhaseField& f, const std::string& path) {
  write_raw(f.data, path);
  write_sidecar(path, {{"kind", "phase"},
                       {"d", std::to_string(f.grid.d)},
                       {"n", std::to_string(f.grid.n)},
                       {"k", "1"},
                       {"L_x", fmt_double(f.grid.L_x)},
                       {"L_v", fmt_double(f.grid.L_v)},
                       {"flags", f.real_flag ? "real" : ""}});
}

PhaseField load_phase_field(const std::string& path) {
  auto kv = read_sidecar(path);
  if (kv["kind"] != "phase") throw GridError("not a phase field: " + path);
  GridSpec g = make_grid(std::stoi(kv["d"]), std::stoi(kv["n"]), std::stod(kv["L_x"]),
                         std::stod(kv["L_v"]));
  PhaseField f(g);
  read_raw(f.data, path);
  f.real_flag = kv["flags"].find("real") != std::string::npos;
  return f;
}

void save_density_matrix(const DensityMatrix& m, const std::string& path) {
  std::string flags;
  if (m.hermitian_flag) flags += "hermitian,";
  if (m.symmetric_flag) flags += "symmetric,";
  write_raw(m.data, path);
  write_sidecar(path, {{"kind", "density"},
                       {"d", std::to_string(m.grid.d)},
                       {"n", std::to_string(m.grid.n)},
                       {"k", std::to_string(m.k)},
                       {"L_x", fmt_double(m.grid.L_x)},
                       {"L_v", fmt_double(m.grid.L_v)},
                       {"flags", flags}});
}

DensityMatrix load_density_matrix(const std::string& path) {
  auto kv = read_sidecar(path);
  if (kv["kind"] != "density") throw GridError("not a density matrix: " + path);
  GridSpec g = make_grid(std::stoi(kv["d"]), std::stoi(kv["n"]), std::stod(kv["L_x"]),
                         std::stod(kv["L_v"]));
  DensityMatrix m(g, std::stoi(kv["k"]));
  read_raw(m.data, path);
  m.hermitian_flag = kv["flags"].find("hermitian") != std::string::npos;
  m.symmetric_flag = kv["flags"].find("symmetric") != std::string::npos;
  return m;
}

}  // namespace wk
