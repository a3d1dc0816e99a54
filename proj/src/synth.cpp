#include "enose/synth.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "enose/error.hpp"
#include "enose/random.hpp"

namespace enose {
namespace {

constexpr std::uint64_t kSignatureTag = 0x5167;
constexpr std::uint64_t kSessionTag = 0x5e55;

struct Layout {
  std::array<std::array<double, kHeaterSteps>, 4> class_res{};
  std::array<std::array<double, 3>, 4> class_env{};
  std::array<std::array<double, kHeaterSteps>, 14> label_res{};
  std::array<std::array<double, 3>, 14> label_env{};
  std::array<std::array<double, kHeaterSteps>, 14> drift_shape{};
};

// Raw standard-normal draws; scaled by the config later so separations can
// be changed without reshuffling the table.
Layout draw_layout(std::uint64_t seed) {
  Rng rng(derive_seed(seed, kSignatureTag));
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Layout l;
  for (auto& c : l.class_res) {
    for (double& v : c) v = z(rng);
  }
  for (auto& c : l.class_env) {
    for (double& v : c) v = z(rng);
  }
  for (auto& c : l.label_res) {
    for (double& v : c) v = z(rng);
  }
  for (auto& c : l.label_env) {
    for (double& v : c) v = z(rng);
  }
  for (auto& c : l.drift_shape) {
    for (double& v : c) v = u(rng);
  }
  // Label offsets are centred within their class so the class mean is
  // governed by class_separation alone.
  for (auto gc : kGeneralClasses) {
    const auto labels = labels_of(gc);
    std::array<double, kHeaterSteps> mr{};
    std::array<double, 3> me{};
    for (auto lab : labels) {
      for (std::size_t s = 0; s < kHeaterSteps; ++s) mr[s] += l.label_res[index_of(lab)][s] / labels.size();
      for (std::size_t e = 0; e < 3; ++e) me[e] += l.label_env[index_of(lab)][e] / labels.size();
    }
    for (auto lab : labels) {
      for (std::size_t s = 0; s < kHeaterSteps; ++s) l.label_res[index_of(lab)][s] -= mr[s];
      for (std::size_t e = 0; e < 3; ++e) l.label_env[index_of(lab)][e] -= me[e];
    }
  }
  return l;
}

// Heater steps run from cool to hot; the oxide's resistance falls as it heats.
double heater_profile(std::size_t step) { return -2.0 * static_cast<double>(step) / (kHeaterSteps - 1); }

double clamp_to(const ChannelRange& r, double v) { return std::min(r.high, std::max(r.low, v)); }

struct CellMean {
  std::array<double, 3> env{};  // temperature, pressure, humidity
  std::array<double, kHeaterSteps> log_r{};
};

CellMean cell_mean(const SynthConfig& c, const Layout& l, SpecificLabel label, FreshnessLevel f) {
  const std::size_t ci = index_of(class_of(label));
  const std::size_t li = index_of(label);
  const std::array<const ChannelRange*, 3> ranges{&c.temperature_c, &c.pressure_hpa, &c.humidity_pct};
  CellMean m;
  for (std::size_t e = 0; e < 3; ++e) {
    // One class/label sigma spans an eighth of the channel's baseline range.
    const double width = (ranges[e]->high - ranges[e]->low) / 8.0;
    const double v = ranges[e]->center() +
                     width * (c.class_separation * l.class_env[ci][e] + c.label_separation * l.label_env[li][e]);
    m.env[e] = clamp_to(*ranges[e], v);
  }
  const double base = 0.5 * (std::log(c.resistance_ohm.low) + std::log(c.resistance_ohm.high)) + 1.0;
  for (std::size_t s = 0; s < kHeaterSteps; ++s) {
    m.log_r[s] = base + heater_profile(s) + c.class_separation * l.class_res[ci][s] +
                 c.label_separation * l.label_res[li][s] -
                 c.freshness_drift * static_cast<double>(index_of(f)) * l.drift_shape[li][s];
  }
  return m;
}

Signature to_signature(const CellMean& m) {
  Signature sig{};
  for (std::size_t s = 0; s < kHeaterSteps; ++s) {
    sig[feature_index(Channel::Temperature, s)] = m.env[0];
    sig[feature_index(Channel::Pressure, s)] = m.env[1];
    sig[feature_index(Channel::Humidity, s)] = m.env[2];
    sig[feature_index(Channel::Resistance, s)] = std::exp(m.log_r[s]);
  }
  return sig;
}

std::vector<std::pair<SpecificLabel, FreshnessLevel>> cells_of(const SynthConfig& c) {
  if (!c.cells.empty()) return c.cells;
  std::vector<std::pair<SpecificLabel, FreshnessLevel>> all;
  for (auto l : kSpecificLabels) {
    for (auto f : kFreshnessLevels) all.emplace_back(l, f);
  }
  return all;
}

std::string lower_name(std::string_view s) {
  std::string out;
  for (char ch : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

// Gaussian draw redrawn until it lands inside [lo, hi].
double bounded(Rng& rng, double mean, double sigma, double lo, double hi) {
  std::normal_distribution<double> z(mean, sigma);
  for (int i = 0; i < 1000; ++i) {
    const double v = z(rng);
    if (v >= lo && v <= hi) return v;
  }
  return std::min(hi, std::max(lo, mean));
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& m) { throw InvalidConfig("synth: " + m); };
  if (sessions_per_cell < 1) fail("sessions_per_cell must be >= 1");
  if (cycles_per_session < 1) fail("cycles_per_session must be >= 1");
  if (class_separation < 0.0 || label_separation < 0.0 || freshness_drift < 0.0 || session_spread < 0.0 ||
      environment_spread < 0.0) {
    fail("separations, drift and session spread must be >= 0");
  }
  if (label_separation > class_separation) fail("label_separation must not exceed class_separation");
  if (!(noise.temperature_c > 0.0 && noise.pressure_hpa > 0.0 && noise.humidity_pct > 0.0 &&
        noise.log_resistance > 0.0 && noise.step_jitter > 0.0)) {
    fail("every noise sigma must be > 0");
  }
  if (!(temperature_c.low <= temperature_c.high)) fail("temperature range is empty");
  if (!(pressure_hpa.low > 0.0 && pressure_hpa.low <= pressure_hpa.high)) fail("pressure range must be positive");
  if (!(humidity_pct.low >= 0.0 && humidity_pct.high <= 100.0 && humidity_pct.low <= humidity_pct.high)) {
    fail("humidity range must lie in [0, 100]");
  }
  if (!(resistance_ohm.low > 0.0 && resistance_ohm.low <= resistance_ohm.high)) {
    fail("resistance range must be positive");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (cells[i] == cells[j]) fail("duplicate cell " + encode_joint(cells[i].first, cells[i].second));
    }
  }
}

SynthConfig synth_preset(std::string_view name, std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  if (name == "easy") {
    c.class_separation = 2.0;
    c.label_separation = 1.0;
    c.freshness_drift = 0.5;
    c.session_spread = 0.5;
    c.environment_spread = 0.1;
  } else if (name == "hier") {
    c.class_separation = 1.5;
    c.label_separation = 0.4;
    c.freshness_drift = 0.07;
    c.session_spread = 0.5;
    c.environment_spread = 0.1;
    c.cycles_per_session = 10;
  } else if (name == "flat") {
    c.class_separation = 0.5;
    c.label_separation = 0.5;
    c.freshness_drift = 0.3;
    c.session_spread = 1.0;
  } else if (name == "hard") {
    c.class_separation = 0.3;
    c.label_separation = 0.1;
    c.freshness_drift = 0.05;
    c.session_spread = 2.0;
  } else {
    throw InvalidConfig("unknown synth preset '" + std::string(name) + "' (easy, hier, flat, hard)");
  }
  return c;
}

SignatureTable signature_table(const SynthConfig& config) {
  config.validate();
  const Layout layout = draw_layout(config.seed);
  SignatureTable t;
  for (auto l : kSpecificLabels) {
    for (auto f : kFreshnessLevels) t.cells[{l, f}] = to_signature(cell_mean(config, layout, l, f));
  }
  return t;
}

std::vector<MeasurementSession> generate_corpus(const SynthConfig& config) {
  config.validate();
  const Layout layout = draw_layout(config.seed);
  const SynthNoise& n = config.noise;
  const double spread = config.session_spread;
  const double env_spread = config.environment_spread;
  std::vector<MeasurementSession> sessions;
  std::size_t serial = 0;
  for (const auto& [label, fresh] : cells_of(config)) {
    const CellMean mean = cell_mean(config, layout, label, fresh);
    for (int rep = 0; rep < config.sessions_per_cell; ++rep, ++serial) {
      Rng rng(derive_seed(derive_seed(config.seed, kSessionTag), serial));
      std::normal_distribution<double> z(0.0, 1.0);
      // Session latent: shared by every cycle of this session.
      CellMean latent = mean;
      latent.env[0] += env_spread * n.temperature_c * z(rng);
      latent.env[1] += env_spread * n.pressure_hpa * z(rng);
      latent.env[2] += env_spread * n.humidity_pct * z(rng);
      for (double& v : latent.log_r) v += spread * n.log_resistance * z(rng);
      latent.env[2] = std::min(100.0, std::max(0.0, latent.env[2]));

      std::vector<ScanCycle> cycles;
      for (int k = 0; k < config.cycles_per_session; ++k) {
        const double t = latent.env[0] + n.temperature_c * z(rng);
        const double p = bounded(rng, latent.env[1], n.pressure_hpa, 1e-6, 1e9);
        const double h = bounded(rng, latent.env[2], n.humidity_pct, 0.0, 100.0);
        std::array<StepReading, kHeaterSteps> steps{};
        for (std::size_t s = 0; s < kHeaterSteps; ++s) {
          StepReading& r = steps[s];
          r.temperature_c = t + n.step_jitter * n.temperature_c * z(rng);
          r.pressure_hpa = bounded(rng, p, n.step_jitter * n.pressure_hpa, 1e-6, 1e9);
          r.humidity_pct = bounded(rng, h, n.step_jitter * n.humidity_pct, 0.0, 100.0);
          r.resistance_ohm = std::exp(latent.log_r[s] + n.log_resistance * z(rng));
        }
        cycles.emplace_back(steps);
      }
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "-%02d", rep + 1);
      std::string id = lower_name(name(label)) + "-" + lower_name(name(fresh)) + suffix;
      sessions.emplace_back(std::move(id), Annotation{class_of(label), label, fresh}, std::move(cycles));
    }
  }
  return sessions;
}

double fisher_ratio(const Eigen::MatrixXd& rows, std::span<const int> targets, std::size_t classes) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  if (n == 0 || classes < 2) return 0.0;
  Eigen::MatrixXd x = rows;
  const Eigen::RowVectorXd mu = x.colwise().mean();
  x.rowwise() -= mu;
  for (Eigen::Index c = 0; c < d; ++c) {
    const double sd = std::sqrt(x.col(c).squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, n - 1)));
    if (sd > 0.0) x.col(c) /= sd;
  }
  const auto k = static_cast<Eigen::Index>(classes);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, d);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    means.row(targets[static_cast<std::size_t>(i)]) += x.row(i);
    counts(targets[static_cast<std::size_t>(i)]) += 1.0;
  }
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index c = 0; c < k; ++c) {
    if (counts(c) == 0.0) continue;
    means.row(c) /= counts(c);
    sb.noalias() += counts(c) * means.row(c).transpose() * means.row(c);
  }
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd r = x.row(i) - means.row(targets[static_cast<std::size_t>(i)]);
    sw.noalias() += r.transpose() * r;
  }
  // A tiny ridge keeps constant or collinear columns from blowing up the ratio.
  sw.diagonal().array() += 1e-9 * std::max(1.0, sw.trace() / static_cast<double>(d));
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(sb, sw);
  return std::max(0.0, ges.eigenvalues().maxCoeff());
}

SeparabilityReport separability_report(const Dataset& data) {
  SeparabilityReport r;
  if (data.empty()) return r;
  const Eigen::MatrixXd x = data.matrix();

  auto ratio_over = [&](const std::vector<std::size_t>& idx, auto key, std::size_t classes) {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(idx.size()), x.cols());
    std::vector<int> t;
    std::vector<bool> seen(classes, false);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      sub.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
      t.push_back(static_cast<int>(key(data.row(idx[i]).annotation)));
      seen[static_cast<std::size_t>(t.back())] = true;
    }
    if (std::count(seen.begin(), seen.end(), true) < 2) return -1.0;
    return fisher_ratio(sub, t, classes);
  };

  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  r.stage1 = std::max(0.0, ratio_over(all, [](const Annotation& a) { return index_of(a.general_class); }, 4));
  for (auto c : kGeneralClasses) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.row(i).annotation.general_class == c) idx.push_back(i);
    }
    const double v = ratio_over(idx, [](const Annotation& a) { return index_of(a.label); }, 14);
    if (v >= 0.0) r.stage2[c] = v;
  }
  for (auto l : kSpecificLabels) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.row(i).annotation.label == l) idx.push_back(i);
    }
    const double v = ratio_over(idx, [](const Annotation& a) { return index_of(a.freshness); }, 4);
    if (v >= 0.0) r.stage3[l] = v;
  }
  return r;
}

}  // namespace enose
