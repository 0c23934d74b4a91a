#include "geosep/pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace geosep {

double diffusivity_factor(Diffusivity d) { return d == Diffusivity::Half ? 0.5 : 1.0; }

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string axis_token(int k) {
  if (k == 0) return "c0";
  return (k > 0 ? "c" : "s") + std::to_string(std::abs(k));
}

// Slot s in [0, 2T] of a one-axis Fourier basis: 0, +1, -1, +2, -2, ...
int slot_frequency(int s) { return s == 0 ? 0 : (s % 2 == 1 ? (s + 1) / 2 : -(s / 2)); }
int frequency_slot(int k) { return k == 0 ? 0 : (k > 0 ? 2 * k - 1 : -2 * k); }

// f_k(u) for the angle u: 1, sqrt2 cos(k u), sqrt2 sin(|k| u).
double fourier_factor(int k, double u) {
  if (k == 0) return 1.0;
  return k > 0 ? std::sqrt(2.0) * std::cos(k * u) : std::sqrt(2.0) * std::sin(-k * u);
}

std::vector<double> fourier_row(int truncation, double u) {
  std::vector<double> row(2 * truncation + 1);
  for (int s = 0; s <= 2 * truncation; ++s) row[s] = fourier_factor(slot_frequency(s), u);
  return row;
}

std::size_t legendre_index(int l, int m) { return static_cast<std::size_t>(l) * (l + 1) / 2 + m; }

// Normalized associated Legendre values P_l^m(z) for 0 <= m <= l <= L, with
// the same recurrence and normalization as real_spherical_harmonic (the sqrt2
// of the m != 0 harmonics is not included).
std::vector<double> legendre_table(int L, double z) {
  std::vector<double> t(legendre_index(L, L) + 1, 0.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  double pmm = 1.0;
  for (int m = 0; m <= L; ++m) {
    if (m > 0) pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    t[legendre_index(m, m)] = pmm;
    if (m == L) break;
    double prev = pmm;
    double cur = std::sqrt(2.0 * m + 3.0) * z * pmm;
    t[legendre_index(m + 1, m)] = cur;
    for (int l = m + 2; l <= L; ++l) {
      double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) / (4.0 * double(l - 1) * (l - 1) - 1.0));
      double next = a * (z * cur - b * prev);
      prev = cur;
      cur = next;
      t[legendre_index(l, m)] = cur;
    }
  }
  return t;
}

void sort_modes(std::vector<SpectralMode>& modes) {
  std::stable_sort(modes.begin(), modes.end(),
                   [](const SpectralMode& a, const SpectralMode& b) { return a.lambda < b.lambda; });
}

}  // namespace

std::vector<SpectralMode> eigenbasis(const Manifold& m, int truncation) {
  if (truncation < 1) throw std::invalid_argument("eigenbasis: truncation must be >= 1");
  std::vector<SpectralMode> modes;
  switch (m.kind()) {
    case ManifoldKind::Circle:
      modes.push_back({"c0", 0.0, 0.0, {0, 0, 0}});
      for (int k = 1; k <= truncation; ++k) {
        modes.push_back({"cos" + std::to_string(k), double(k) * k, 0.0, {k, 0, 0}});
        modes.push_back({"sin" + std::to_string(k), double(k) * k, 0.0, {-k, 0, 0}});
      }
      break;
    case ManifoldKind::FlatTorus: {
      const int d = m.dim();
      const int width = 2 * truncation + 1;
      std::size_t total = 1;
      for (int a = 0; a < d; ++a) total *= width;
      // Axis 0 varies slowest, matching the tensor layout used by project.
      for (std::size_t flat = 0; flat < total; ++flat) {
        std::array<int, 3> idx{};
        std::size_t rest = flat;
        for (int a = d - 1; a >= 0; --a) {
          idx[a] = slot_frequency(static_cast<int>(rest % width));
          rest /= width;
        }
        std::string id;
        double k2 = 0.0;
        for (int a = 0; a < d; ++a) {
          if (a) id += '.';
          id += axis_token(idx[a]);
          k2 += double(idx[a]) * idx[a];
        }
        modes.push_back({id, 4.0 * std::numbers::pi * std::numbers::pi * k2, 0.0, idx});
      }
      break;
    }
    case ManifoldKind::Sphere2:
      for (int l = 0; l <= truncation; ++l) {
        for (int mm = -l; mm <= l; ++mm) {
          modes.push_back({"Y" + std::to_string(l) + "," + std::to_string(mm), double(l) * (l + 1), 0.0,
                           {l, mm, 0}});
        }
      }
      break;
  }
  sort_modes(modes);
  return modes;
}

double eval_mode(const Manifold& m, const SpectralMode& mode, const Point& p) {
  switch (m.kind()) {
    case ManifoldKind::Circle: return fourier_factor(mode.index[0], p.x[0]);
    case ManifoldKind::FlatTorus: {
      double v = 1.0;
      for (int a = 0; a < m.dim(); ++a) v *= fourier_factor(mode.index[a], kTwoPi * p.x[a]);
      return v;
    }
    case ManifoldKind::Sphere2: return real_spherical_harmonic(mode.index[0], mode.index[1], p);
  }
  return 0.0;
}

double SpectralField::eval(const Point& p) const {
  if (modes.empty()) return 0.0;
  double sum = 0.0;
  switch (manifold.kind()) {
    case ManifoldKind::Circle:
    case ManifoldKind::FlatTorus: {
      const int d = manifold.dim();
      std::array<std::vector<double>, 3> rows;
      for (int a = 0; a < d; ++a) {
        const double u = manifold.kind() == ManifoldKind::Circle ? p.x[0] : kTwoPi * p.x[a];
        rows[a] = fourier_row(truncation, u);
      }
      for (const auto& mode : modes) {
        double v = mode.coefficient;
        for (int a = 0; a < d; ++a) v *= rows[a][frequency_slot(mode.index[a])];
        sum += v;
      }
      break;
    }
    case ManifoldKind::Sphere2: {
      const double z = std::clamp(p.x[2], -1.0, 1.0);
      const auto table = legendre_table(truncation, z);
      const double phi = std::atan2(p.x[1], p.x[0]);
      for (const auto& mode : modes) {
        const int l = mode.index[0];
        const int mm = mode.index[1];
        double v = table[legendre_index(l, std::abs(mm))];
        if (mm > 0) v *= std::sqrt(2.0) * std::cos(mm * phi);
        if (mm < 0) v *= std::sqrt(2.0) * std::sin(-mm * phi);
        sum += mode.coefficient * v;
      }
      break;
    }
  }
  return sum;
}

const SpectralMode* SpectralField::find(std::string_view id) const {
  for (const auto& mode : modes) {
    if (mode.id == id) return &mode;
  }
  if (id == "c0" && !modes.empty() && modes.front().lambda == 0.0) return &modes.front();
  return nullptr;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

constexpr std::size_t kMinNodes = 10000;

std::vector<double> project_circle(const std::function<double(const Point&)>& rho0, int T) {
  const std::size_t n = std::max<std::size_t>(16384, 4 * static_cast<std::size_t>(T) + 4);
  std::vector<double> coef(2 * T + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    const double v = rho0(Point{{theta, 0.0, 0.0}});
    for (int s = 0; s <= 2 * T; ++s) coef[s] += v * fourier_factor(slot_frequency(s), theta);
  }
  for (double& c : coef) c /= static_cast<double>(n);
  return coef;  // by slot
}

// Tensor of coefficients by slot, axis 0 slowest.
std::vector<double> project_torus(const std::function<double(const Point&)>& rho0, int d, int T) {
  std::size_t n = static_cast<std::size_t>(2 * T + 2);
  while (std::pow(static_cast<double>(n), d) < static_cast<double>(kMinNodes)) ++n;
  std::vector<std::size_t> dims(d, n);
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= n;
  std::vector<double> data(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Point p;
    std::size_t rest = flat;
    for (int a = d - 1; a >= 0; --a) {
      p.x[a] = static_cast<double>(rest % n) / static_cast<double>(n);
      rest /= n;
    }
    data[flat] = rho0(p);
  }
  const std::size_t width = 2 * T + 1;
  std::vector<std::vector<double>> basis(width, std::vector<double>(n));
  for (std::size_t s = 0; s < width; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      basis[s][i] = fourier_factor(slot_frequency(static_cast<int>(s)), kTwoPi * i / static_cast<double>(n)) /
                    static_cast<double>(n);
    }
  }
  for (int a = 0; a < d; ++a) {
    std::size_t outer = 1, inner = 1;
    for (int b = 0; b < a; ++b) outer *= dims[b];
    for (int b = a + 1; b < d; ++b) inner *= dims[b];
    std::vector<double> next(outer * width * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t s = 0; s < width; ++s) {
        for (std::size_t i = 0; i < dims[a]; ++i) {
          const double w = basis[s][i];
          const double* src = &data[(o * dims[a] + i) * inner];
          double* dst = &next[(o * width + s) * inner];
          for (std::size_t q = 0; q < inner; ++q) dst[q] += w * src[q];
        }
      }
    }
    data.swap(next);
    dims[a] = width;
  }
  return data;
}

// Coefficients indexed by legendre_index(l, |m|), cosine and sine parts.
void project_sphere(const std::function<double(const Point&)>& rho0, int L, std::vector<double>& cos_part,
                    std::vector<double>& sin_part) {
  int nz = std::max(2 * L + 2, 100);
  std::vector<double> z, w;
  gauss_legendre(nz, z, w);
  const int nphi = 2 * nz;
  cos_part.assign(legendre_index(L, L) + 1, 0.0);
  sin_part.assign(legendre_index(L, L) + 1, 0.0);
  std::vector<double> a(L + 1), b(L + 1), ring(nphi);
  for (int i = 0; i < nz; ++i) {
    const double s = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
    for (int j = 0; j < nphi; ++j) {
      const double phi = kTwoPi * (j + 0.5) / nphi;
      ring[j] = rho0(Point{{s * std::cos(phi), s * std::sin(phi), z[i]}});
    }
    for (int mm = 0; mm <= L; ++mm) {
      double ca = 0.0, sb = 0.0;
      for (int j = 0; j < nphi; ++j) {
        const double phi = kTwoPi * (j + 0.5) / nphi;
        ca += ring[j] * std::cos(mm * phi);
        sb += ring[j] * std::sin(mm * phi);
      }
      a[mm] = ca / nphi;
      b[mm] = sb / nphi;
    }
    const auto table = legendre_table(L, z[i]);
    // dV-bar = dz / 2 * dphi / (2 pi)
    const double wz = w[i] / 2.0;
    for (int l = 0; l <= L; ++l) {
      for (int mm = 0; mm <= l; ++mm) {
        const std::size_t k = legendre_index(l, mm);
        const double f = mm == 0 ? 1.0 : std::sqrt(2.0);
        cos_part[k] += wz * table[k] * f * a[mm];
        sin_part[k] += wz * table[k] * f * b[mm];
      }
    }
  }
}

}  // namespace

SpectralField project(const std::function<double(const Point&)>& rho0, const Manifold& m, int truncation) {
  if (truncation < 1) throw std::invalid_argument("project: truncation must be >= 1");
  SpectralField field;
  field.manifold = m;
  field.truncation = truncation;
  field.modes = eigenbasis(m, truncation);
  switch (m.kind()) {
    case ManifoldKind::Circle: {
      const auto coef = project_circle(rho0, truncation);
      for (auto& mode : field.modes) mode.coefficient = coef[frequency_slot(mode.index[0])];
      break;
    }
    case ManifoldKind::FlatTorus: {
      const int d = m.dim();
      const auto coef = project_torus(rho0, d, truncation);
      const std::size_t width = 2 * truncation + 1;
      for (auto& mode : field.modes) {
        std::size_t flat = 0;
        for (int a = 0; a < d; ++a) flat = flat * width + frequency_slot(mode.index[a]);
        mode.coefficient = coef[flat];
      }
      break;
    }
    case ManifoldKind::Sphere2: {
      std::vector<double> c, s;
      project_sphere(rho0, truncation, c, s);
      for (auto& mode : field.modes) {
        const int l = mode.index[0];
        const int mm = mode.index[1];
        const std::size_t k = legendre_index(l, std::abs(mm));
        mode.coefficient = mm >= 0 ? c[k] : s[k];
      }
      break;
    }
  }
  Rng rng(0x7e57c0de);
  double residual = 0.0;
  for (int i = 0; i < 256; ++i) {
    const Point p = m.sample_uniform(rng);
    residual = std::max(residual, std::abs(rho0(p) - field.eval(p)));
  }
  field.residual = residual;
  return field;
}

SpectralField evolve(const SpectralField& f, double t, Diffusivity d) {
  if (!(t >= 0.0)) throw std::invalid_argument("evolve: t must be nonnegative");
  SpectralField out = f;
  const double rate = diffusivity_factor(d) * t;
  for (auto& mode : out.modes) {
    if (mode.lambda != 0.0) mode.coefficient *= std::exp(-mode.lambda * rate);
  }
  return out;
}

double pair(const SpectralField& f, const TestFunction& phi) {
  if (phi.spectral) {
    const SpectralMode* mode = f.find(phi.spectral->mode_id);
    return mode ? mode->coefficient * phi.spectral->scale : 0.0;
  }
  const SpectralField g = project(phi.eval, f.manifold, f.truncation);
  double sum = 0.0;
  for (std::size_t k = 0; k < f.modes.size(); ++k) sum += f.modes[k].coefficient * g.modes[k].coefficient;
  return sum;
}

void write_field_csv(std::ostream& out, const SpectralField& f) {
  out << "mode_id,lambda,coefficient\n";
  char buf[128];
  for (const auto& mode : f.modes) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", mode.lambda, mode.coefficient);
    out << '"' << mode.id << '"' << buf;
  }
}

}  // namespace geosep
