#include "oscres/potential_spec.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace oscres {

namespace {

using nlohmann::json;

double number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw SpecError(std::string("potential spec: '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SpecError(std::string("potential spec: '") + key + "' must be finite");
  return d;
}

double required_number(const json& obj, const char* key) {
  if (!obj.contains(key)) throw SpecError(std::string("potential spec: missing '") + key + "'");
  return number(obj, key, 0.0);
}

cplx amplitude(const json& obj) {
  if (!obj.contains("amplitude")) return 1.0;
  const auto& v = obj.at("amplitude");
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw SpecError("potential spec: 'amplitude' must be a number or [re, im]");
}

struct Table {
  std::vector<double> x;
  std::vector<cplx> y;

  [[nodiscard]] cplx at(double t) const {
    if (t < x.front() || t > x.back()) return 0.0;
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    if (it == x.end()) return y.back();
    const auto i = static_cast<std::size_t>(it - x.begin());
    const double s = (t - x[i - 1]) / (x[i] - x[i - 1]);
    return (1.0 - s) * y[i - 1] + s * y[i];
  }
};

std::shared_ptr<Table> read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("potential spec: cannot open table '" + path.string() + "'");
  auto table = std::make_shared<Table>();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x = 0.0, re = 0.0, im = 0.0;
    if (!(ls >> x >> re)) {
      if (table->x.empty()) continue;  // header
      throw SpecError("potential spec: bad row " + std::to_string(lineno) + " in '" + path.string() + "'");
    }
    if (!(ls >> im)) im = 0.0;
    if (!table->x.empty() && !(x > table->x.back())) {
      throw SpecError("potential spec: table abscissae must increase in '" + path.string() + "'");
    }
    table->x.push_back(x);
    table->y.emplace_back(re, im);
  }
  if (table->x.size() < 2) throw SpecError("potential spec: table '" + path.string() + "' needs two rows");
  return table;
}

std::function<cplx(double)> family(const json& m, double L, const std::filesystem::path& base,
                                   std::vector<double>& breakpoints) {
  if (!m.contains("family") || !m.at("family").is_string()) throw SpecError("potential spec: mode without 'family'");
  const auto name = m.at("family").get<std::string>();
  const cplx amp = amplitude(m);
  const double phase = number(m, "phase", 0.0);
  const double center = number(m, "center", 0.0);
  if (name == "bump") {
    const double a = number(m, "a", L);
    if (!(a > 0.0)) throw SpecError("potential spec: bump 'a' must be positive");
    return [=](double x) { return amp * std::exp(I * (phase * x)) * bump(x - center, a); };
  }
  if (name == "truncated_gaussian") {
    const double sigma = required_number(m, "sigma");
    const double a = number(m, "a", L);
    if (!(sigma > 0.0) || !(a > 0.0)) throw SpecError("potential spec: truncated_gaussian needs sigma, a > 0");
    breakpoints.push_back(center - a);
    breakpoints.push_back(center + a);
    return [=](double x) {
      const double s = x - center;
      if (std::abs(s) >= a) return cplx{0.0};
      return amp * std::exp(I * (phase * x)) * std::exp(-s * s / (2.0 * sigma * sigma));
    };
  }
  if (name == "step") {
    const double x0 = required_number(m, "x0");
    const double x1 = required_number(m, "x1");
    if (!(x1 > x0)) throw SpecError("potential spec: step needs x0 < x1");
    breakpoints.push_back(x0);
    breakpoints.push_back(x1);
    return [=](double x) { return x >= x0 && x <= x1 ? amp * std::exp(I * (phase * x)) : cplx{0.0}; };
  }
  if (name == "tabulated") {
    if (!m.contains("path") || !m.at("path").is_string()) throw SpecError("potential spec: tabulated needs 'path'");
    std::filesystem::path p = m.at("path").get<std::string>();
    if (p.is_relative()) p = base / p;
    auto table = read_table(p);
    return [=](double x) { return amp * std::exp(I * (phase * x)) * table->at(x); };
  }
  throw SpecError("potential spec: unknown family '" + name + "'");
}

}  // namespace

PotentialSpec parse_potential_spec(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("potential spec: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SpecError("potential spec: top level must be an object");
  const double L = required_number(doc, "L");
  if (!(L > 0.0)) throw SpecError("potential spec: L must be positive");
  int grid_n = kDefaultGridNodes;
  if (doc.contains("grid_n")) {
    if (!doc.at("grid_n").is_number_integer()) throw SpecError("potential spec: grid_n must be an integer");
    grid_n = doc.at("grid_n").get<int>();
    if (grid_n < 5) throw SpecError("potential spec: grid_n must be >= 5");
  }
  bool real_valued = false;
  if (doc.contains("real_valued")) {
    if (!doc.at("real_valued").is_boolean()) throw SpecError("potential spec: real_valued must be a boolean");
    real_valued = doc.at("real_valued").get<bool>();
  }
  if (!doc.contains("modes") || !doc.at("modes").is_array() || doc.at("modes").empty()) {
    throw SpecError("potential spec: 'modes' must be a nonempty array");
  }

  std::map<int, std::vector<std::function<cplx(double)>>> parts;
  std::vector<double> bps;
  for (const auto& m : doc.at("modes")) {
    if (!m.is_object() || !m.contains("k") || !m.at("k").is_number_integer()) {
      throw SpecError("potential spec: every mode needs an integer 'k'");
    }
    const int k = m.at("k").get<int>();
    parts[k].push_back(family(m, L, base_dir, bps));
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  for (double b : bps) {
    if (b < -L || b > L) throw SpecError("potential spec: a step or cutoff lies outside [-L, L]");
  }

  std::map<int, std::function<cplx(double)>> exact;
  for (auto& [k, fs] : parts) {
    exact[k] = [fs](double x) {
      cplx s{0.0};
      for (const auto& f : fs) s += f(x);
      return s;
    };
  }
  const Grid grid = default_grid(L, grid_n);
  std::map<int, SampledFunction> modes;
  for (const auto& [k, f] : exact) {
    modes.emplace(k, SampledFunction::sample(grid, [&](double x) { return std::abs(x) <= L ? f(x) : cplx{0.0}; }));
  }
  try {
    return {FourierPotential(L, std::move(modes), real_valued), std::move(exact), std::move(bps)};
  } catch (const std::invalid_argument& e) {
    throw SpecError(std::string("potential spec: ") + e.what());
  }
}

PotentialSpec load_potential_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("potential spec: cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_potential_spec(ss.str(), path.parent_path());
}

cplx evaluate_exact(const PotentialSpec& spec, Epsilon eps, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("evaluate_exact: non-finite x");
  const double L = spec.support_radius();
  if (x < -L || x > L) return 0.0;
  cplx s{0.0};
  for (const auto& [k, f] : spec.exact) {
    if (k == 0) {
      s += f(x);
    } else if (eps.value > 0.0) {
      s += f(x) * std::exp(I * (k * x / eps.value));
    }
  }
  return s;
}

CellProfile spec_profile(const PotentialSpec& spec, Epsilon eps, int min_cells) {
  const auto [a, b] = matching_interval(spec.sampled);
  const int total = cells_for(spec.sampled, eps, a, b, kCellsPerPeriod, min_cells);
  std::vector<double> cuts{a};
  for (double x : spec.breakpoints) cuts.push_back(x);
  cuts.push_back(b);
  std::vector<double> widths;
  std::vector<cplx> values;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double lo = cuts[p], hi = cuts[p + 1];
    if (!(hi > lo)) continue;
    const int n = std::max(1, static_cast<int>(std::ceil(total * (hi - lo) / (b - a))));
    const double h = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
      widths.push_back(h);
      values.push_back(evaluate_exact(spec, eps, lo + (i + 0.5) * h));
    }
  }
  return {a, std::move(widths), std::move(values)};
}

KernelPotential spec_kernel(const PotentialSpec& spec, Epsilon eps) {
  const double L = spec.support_radius();
  std::vector<double> bps{-L};
  for (double x : spec.breakpoints) {
    if (x > -L && x < L) bps.push_back(x);
  }
  bps.push_back(L);
  // Copies the evaluators so the kernel does not depend on the lifetime of spec.
  auto exact = spec.exact;
  return {[exact = std::move(exact), eps, L](double x) {
            if (x < -L || x > L) return cplx{0.0};
            cplx s{0.0};
            for (const auto& [k, f] : exact) {
              if (k == 0) {
                s += f(x);
              } else if (eps.value > 0.0) {
                s += f(x) * std::exp(I * (k * x / eps.value));
              }
            }
            return s;
          },
          std::move(bps)};
}

}  // namespace oscres
