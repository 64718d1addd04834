#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "modecouple/constants.hpp"

namespace modecouple::cli {

using constants::angular;
using constants::two_pi;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Context {
  std::vector<Diagnostic> diags;

  void error(const std::string& path, const std::string& msg) {
    diags.push_back({Diagnostic::Level::error, path, msg});
  }
  void warn(const std::string& path, const std::string& msg) {
    diags.push_back({Diagnostic::Level::warning, path, msg});
  }
  bool failed() const {
    for (const auto& d : diags)
      if (d.level == Diagnostic::Level::error) return true;
    return false;
  }
};

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

/// A mapping node with a fixed key set. Missing or null sections read as
/// empty.
class Section {
 public:
  Section(Context& ctx, const YAML::Node& node, std::string path, std::vector<std::string> keys)
      : ctx_(&ctx), node_(mapping(ctx, node, path)), path_(std::move(path)) {
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      bool known = false;
      for (const auto& k : keys) known = known || k == key;
      if (!known) ctx.error(join(path_, key), "unknown key");
    }
  }

  std::string at(const std::string& key) const { return join(path_, key); }
  bool has(const std::string& key) const {
    const auto n = node(key);
    return n.IsDefined() && !n.IsNull();
  }
  YAML::Node node(const std::string& key) const {
    const YAML::Node& n = node_;
    return n[key];
  }
  Context& ctx() const { return *ctx_; }

  Section child(const std::string& key, std::vector<std::string> keys) const {
    return Section(*ctx_, node(key), at(key), std::move(keys));
  }

  std::optional<double> number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return to_number(node(key), at(key));
  }
  double number(const std::string& key, double fallback) const {
    return number(key).value_or(fallback);
  }
  /// Frequency in Hz converted to rad/s.
  std::optional<double> angular_hz(const std::string& key) const {
    auto v = number(key);
    if (v) *v = angular(*v);
    return v;
  }
  std::optional<std::string> text(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const auto n = node(key);
    if (!n.IsScalar()) {
      ctx_->error(at(key), "expected a scalar");
      return std::nullopt;
    }
    return n.as<std::string>();
  }
  std::optional<long long> integer(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const auto n = node(key);
    try {
      if (!n.IsScalar()) throw YAML::Exception(YAML::Mark::null_mark(), "");
      return n.as<long long>();
    } catch (const YAML::Exception&) {
      ctx_->error(at(key), "expected an integer");
      return std::nullopt;
    }
  }
  /// Sequence of numbers, or {start, stop, points}.
  std::optional<std::vector<double>> grid(const std::string& key, double scale = 1.0) const {
    if (!has(key)) return std::nullopt;
    const auto n = node(key);
    std::vector<double> out;
    if (n.IsSequence()) {
      for (std::size_t k = 0; k < n.size(); ++k)
        out.push_back(scale * to_number(n[k], at(key) + "[" + std::to_string(k) + "]"));
    } else if (n.IsMap()) {
      Section s(*ctx_, n, at(key), {"start", "stop", "points"});
      const double a = s.number("start", 0.0);
      const auto b = s.number("stop");
      const auto pts = s.integer("points");
      if (!b) ctx_->error(s.at("stop"), "required");
      if (!pts || *pts < 1) {
        ctx_->error(s.at("points"), "must be an integer >= 1");
        return std::nullopt;
      }
      for (long long k = 0; k < *pts; ++k) {
        const double v = *pts == 1 ? a : a + (b.value_or(a) - a) * double(k) / double(*pts - 1);
        out.push_back(scale * v);
      }
    } else {
      ctx_->error(at(key), "expected a list or {start, stop, points}");
      return std::nullopt;
    }
    if (out.empty()) ctx_->error(at(key), "empty grid");
    return out;
  }
  /// Two numbers [i, j].
  std::optional<std::array<double, 2>> pair(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const auto n = node(key);
    if (!n.IsSequence() || n.size() != 2) {
      ctx_->error(at(key), "expected a list of two numbers");
      return std::nullopt;
    }
    return std::array<double, 2>{to_number(n[0], at(key) + "[0]"),
                                 to_number(n[1], at(key) + "[1]")};
  }

  double to_number(const YAML::Node& n, const std::string& path) const {
    try {
      if (!n.IsScalar()) throw YAML::Exception(YAML::Mark::null_mark(), "");
      const auto s = n.as<std::string>();
      if (s == "none" || s == "inf") return inf;
      return n.as<double>();
    } catch (const YAML::Exception&) {
      ctx_->error(path, "expected a number");
      return std::numeric_limits<double>::quiet_NaN();
    }
  }

 private:
  static YAML::Node mapping(Context& ctx, const YAML::Node& n, const std::string& path) {
    if (!n.IsDefined() || n.IsNull()) return YAML::Node(YAML::NodeType::Map);
    if (!n.IsMap()) {
      ctx.error(path.empty() ? "<root>" : path, "expected a mapping");
      return YAML::Node(YAML::NodeType::Map);
    }
    return n;
  }

  Context* ctx_;
  YAML::Node node_;
  std::string path_;
};

void positive(Context& ctx, const std::string& path, double v) {
  if (!(v > 0.0)) ctx.error(path, "must be > 0");
}
void nonnegative(Context& ctx, const std::string& path, double v) {
  if (!(v >= 0.0)) ctx.error(path, "must be >= 0");
}

std::optional<ModePair> parse_pair(Context& ctx, const std::string& path, const std::string& s) {
  if (s.size() != 2 || s[0] == s[1]) {
    ctx.error(path, "expected two distinct axes such as 'xz'");
    return std::nullopt;
  }
  try {
    return ModePair{axis_from_char(s[0]), axis_from_char(s[1])};
  } catch (const ValidationError&) {
    ctx.error(path, "axes must be x, y or z");
    return std::nullopt;
  }
}

std::string pair_key(Axis a, Axis b) {
  return std::string(to_string(a)) + to_string(b);
}

ModePair default_modes(Subcommand s) {
  switch (s) {
    case Subcommand::swap:
    case Subcommand::cool: return {Axis::z, Axis::x};
    case Subcommand::heatrate: return {Axis::x, Axis::y};
    default: return {Axis::x, Axis::z};
  }
}

template <class F>
void guarded(Context& ctx, const std::string& path, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    ctx.error(path, e.what());
  }
}

void set_path(YAML::Node node, const std::vector<std::string>& keys, std::size_t k,
              const YAML::Node& value) {
  if (k + 1 == keys.size()) {
    node[keys[k]] = value;
    return;
  }
  const YAML::Node child = static_cast<const YAML::Node&>(node)[keys[k]];
  if (!child.IsDefined() || !child.IsMap()) node[keys[k]] = YAML::Node(YAML::NodeType::Map);
  set_path(node[keys[k]], keys, k + 1, value);
}

void apply_override(YAML::Node& root, const Override& o) {
  std::vector<std::string> keys;
  std::stringstream ss(o.path);
  for (std::string k; std::getline(ss, k, '.');) {
    if (k.empty()) throw ConfigError({{Diagnostic::Level::error, o.path, "empty key in override"}});
    keys.push_back(k);
  }
  if (keys.empty()) throw ConfigError({{Diagnostic::Level::error, o.path, "empty override path"}});
  YAML::Node value;
  try {
    value = YAML::Load(o.value);
  } catch (const YAML::Exception&) {
    throw ConfigError({{Diagnostic::Level::error, o.path, "unparsable override value"}});
  }
  set_path(root, keys, 0, value);
}

void parse_trap(const Section& root, RunConfig& rc) {
  auto& ctx = root.ctx();
  const auto s = root.child("trap", {"mass_amu", "mass_kg", "charge_e", "frequencies_hz",
                                     "curvature_m", "curvature_sign", "linear_m", "laser"});
  TrapConfig& t = rc.trap;
  if (s.has("mass_amu") == s.has("mass_kg")) {
    ctx.error(s.at("mass_amu"), "give exactly one of mass_amu and mass_kg");
  } else if (s.has("mass_amu")) {
    t.mass = s.number("mass_amu", 0.0) * constants::atomic_mass_unit;
    positive(ctx, s.at("mass_amu"), t.mass);
  } else {
    t.mass = s.number("mass_kg", 0.0);
    positive(ctx, s.at("mass_kg"), t.mass);
  }
  t.charge = s.number("charge_e", 1.0) * constants::elementary_charge;
  if (!(t.charge != 0.0 && std::isfinite(t.charge))) ctx.error(s.at("charge_e"), "must be nonzero");

  const auto f = s.child("frequencies_hz", {"x", "y", "z"});
  for (int a = 0; a < 3; ++a) {
    const std::string k = to_string(Axis(a));
    const auto v = f.number(k);
    if (!v) {
      ctx.error(f.at(k), "required");
      continue;
    }
    positive(ctx, f.at(k), *v);
    t.omega[a] = angular(*v);
  }

  const std::vector<std::string> pairs{"xy", "xz", "yz"};
  const auto c = s.child("curvature_m", pairs);
  const auto cs = s.child("curvature_sign", pairs);
  for (const auto& k : pairs) {
    const Axis a = axis_from_char(k[0]), b = axis_from_char(k[1]);
    const double len = c.number(k, inf);
    const auto sign = cs.integer(k).value_or(1);
    if (sign != 1 && sign != -1) ctx.error(cs.at(k), "must be +1 or -1");
    if (std::isinf(len)) continue;
    if (!(len > 0.0)) {
      ctx.error(c.at(k), "must be > 0");
      continue;
    }
    t.set_curvature(a, b, len, sign == -1 ? -1 : 1);
  }

  const auto l = s.child("linear_m", {"x", "y", "z"});
  for (int a = 0; a < 3; ++a) {
    const std::string k = to_string(Axis(a));
    const double v = l.number(k, inf);
    if (v == 0.0 || std::isnan(v)) ctx.error(l.at(k), "must be nonzero");
    t.linear[a] = v;
  }

  const auto laser = s.child("laser", {"projection", "wavelength_m"});
  const double lambda = laser.number("wavelength_m", 729e-9);
  positive(ctx, laser.at("wavelength_m"), lambda);
  t.laser_wavenumber = two_pi / lambda;
  if (laser.has("projection")) {
    const auto n = laser.node("projection");
    if (!n.IsSequence() || n.size() != 3) {
      ctx.error(laser.at("projection"), "expected three direction cosines");
    } else {
      for (int a = 0; a < 3; ++a)
        t.laser_projection[a] =
            laser.to_number(n[a], laser.at("projection") + "[" + std::to_string(a) + "]");
    }
  } else {
    ctx.error(laser.at("projection"), "required");
  }
  if (!ctx.failed()) guarded(ctx, "trap", [&] { t.validate(); });
}

void parse_drive(const Section& root, RunConfig& rc) {
  auto& ctx = root.ctx();
  const auto s = root.child("drive", {"modes", "coupling_hz", "amplitude_v", "frequency_hz",
                                      "detuning_hz", "phase_rad", "envelope", "duration_s"});
  rc.modes = default_modes(rc.subcommand);
  if (auto m = s.text("modes"))
    if (auto p = parse_pair(ctx, s.at("modes"), *m)) rc.modes = *p;

  EnvelopeKind kind = default_envelope(rc.modes);
  if (auto e = s.text("envelope")) {
    if (*e == "rectangular")
      kind = EnvelopeKind::rectangular;
    else if (*e == "blackman")
      kind = EnvelopeKind::blackman;
    else
      ctx.error(s.at("envelope"), "expected rectangular or blackman");
  }
  const double phase = s.number("phase_rad", 0.0);
  const double detuning = s.angular_hz("detuning_hz").value_or(0.0);
  if (ctx.failed()) return;

  const TrapConfig& t = rc.trap;
  const double wi = t.frequency(rc.modes.first), wj = t.frequency(rc.modes.second);
  const double resonance =
      rc.subcommand == Subcommand::squeeze ? wi + wj : std::abs(wi - wj);

  DrivePulse p;
  p.phase = phase;
  p.envelope = kind;
  p.frequency = s.angular_hz("frequency_hz").value_or(resonance) + detuning;
  nonnegative(ctx, s.at("frequency_hz"), p.frequency);

  const bool by_g = s.has("coupling_hz"), by_v = s.has("amplitude_v");
  if (by_g && by_v) ctx.error(s.at("coupling_hz"), "give at most one of coupling_hz and amplitude_v");
  // crossing accepts g = 0; bessel scans the amplitude itself
  const bool zero_ok =
      rc.subcommand == Subcommand::crossing || rc.subcommand == Subcommand::bessel;
  const bool needs_drive = rc.subcommand != Subcommand::bessel;
  if (needs_drive && !by_g && !by_v)
    ctx.error(s.at("coupling_hz"), "required (or amplitude_v)");
  if (rc.subcommand == Subcommand::bessel && !s.has("frequency_hz"))
    ctx.error(s.at("frequency_hz"), "required");
  if (ctx.failed()) return;

  guarded(ctx, "drive", [&] {
    if (by_g) {
      const double g = s.angular_hz("coupling_hz").value_or(0.0);
      if (!(g > 0.0) && !(zero_ok && g == 0.0)) {
        ctx.error(s.at("coupling_hz"), zero_ok ? "must be >= 0" : "must be > 0");
        return;
      }
      if (g > 0.0) p.amplitude = amplitude_for_coupling(t, rc.modes, g);
    } else if (by_v) {
      p.amplitude = s.number("amplitude_v", 0.0);
      if (!(p.amplitude > 0.0) && !(zero_ok && p.amplitude == 0.0)) {
        ctx.error(s.at("amplitude_v"), zero_ok ? "must be >= 0" : "must be > 0");
        return;
      }
    }
    rc.coupling = p.amplitude > 0.0 ? std::abs(coupling_rate(t, p, rc.modes)) : 0.0;
    if (needs_drive && !zero_ok && !(rc.coupling > 0.0)) {
      ctx.error(s.at("modes"), "pair has no curvature coupling");
      return;
    }
    if (auto d = s.number("duration_s")) {
      positive(ctx, s.at("duration_s"), *d);
      p.duration = *d;
    } else if (rc.coupling > 0.0) {
      p.duration = equal_area_duration(kind, swap_time(rc.coupling));
    } else {
      p.duration = 1e-3;
    }
    if (!ctx.failed()) p.validate();
  });
  rc.drive = p;
}

void parse_noise(const Section& root, RunConfig& rc) {
  auto& ctx = root.ctx();
  const auto s = root.child("noise", {"heating_rate", "cooling_target"});
  const auto h = s.child("heating_rate", {"x", "y", "z"});
  for (int a = 0; a < 3; ++a) {
    const std::string k = to_string(Axis(a));
    rc.noise.heating_rate[a] = h.number(k, 0.0);
    nonnegative(ctx, h.at(k), rc.noise.heating_rate[a]);
  }
  rc.noise.cooling_target = s.number("cooling_target", 0.0);
  nonnegative(ctx, s.at("cooling_target"), rc.noise.cooling_target);
}

void parse_probe(const Section& root, RunConfig& rc) {
  auto& ctx = root.ctx();
  const auto s = root.child("probe", {"mode", "rabi_frequency_hz", "pulse_time_s", "pulse_area",
                                      "coherence_time_s", "detuning_hz"});
  LaserProbe& p = rc.probe;
  p.mode = rc.modes.first;
  if (auto m = s.text("mode")) {
    if (m->size() == 1) {
      guarded(ctx, s.at("mode"), [&] { p.mode = axis_from_char((*m)[0]); });
    } else {
      ctx.error(s.at("mode"), "expected x, y or z");
    }
  }
  p.rabi_frequency = s.angular_hz("rabi_frequency_hz").value_or(angular(100e3));
  positive(ctx, s.at("rabi_frequency_hz"), p.rabi_frequency);
  p.pulse_time = s.number("pulse_time_s", 0.0);
  nonnegative(ctx, s.at("pulse_time_s"), p.pulse_time);
  rc.pulse_area = s.number("pulse_area", 0.5 * constants::pi);
  positive(ctx, s.at("pulse_area"), rc.pulse_area);
  const double tau_default = rc.subcommand == Subcommand::heatrate ? 500e-6 : inf;
  p.coherence_time = s.number("coherence_time_s", tau_default);
  positive(ctx, s.at("coherence_time_s"), p.coherence_time);
  p.detuning = s.angular_hz("detuning_hz").value_or(0.0);
  if (ctx.failed()) return;
  for (int a = 0; a < 3; ++a) p.lamb_dicke[a] = lamb_dicke(rc.trap, Axis(a));
  guarded(ctx, "probe", [&] { p.validate(); });
}

void cutoffs(const Section& s, std::size_t& a, std::size_t& b) {
  if (auto c = s.pair("cutoffs")) {
    for (int k = 0; k < 2; ++k) {
      const double v = (*c)[k];
      if (!(v >= 0.0) || v != std::floor(v))
        s.ctx().error(s.at("cutoffs"), "must be non-negative integers");
    }
    if (!s.ctx().failed()) {
      a = std::size_t((*c)[0]);
      b = std::size_t((*c)[1]);
    }
  }
}

void initial_nbar(const Section& s, double& a, double& b) {
  if (auto n = s.pair("initial_nbar")) {
    a = (*n)[0];
    b = (*n)[1];
    nonnegative(s.ctx(), s.at("initial_nbar"), a);
    nonnegative(s.ctx(), s.at("initial_nbar"), b);
  }
}

/// Cutoff given explicitly must hold the thermal state.
void truncation(Context& ctx, const std::string& path, double nbar, std::size_t cutoff) {
  if (cutoff == 0) return;
  try {
    thermal_populations(nbar, ModeDim{cutoff});
  } catch (const Error& e) {
    ctx.error(path, e.what());
  }
}

void parse_experiment(const Section& root, RunConfig& rc) {
  auto& ctx = root.ctx();
  const std::string path = "experiment";
  switch (rc.subcommand) {
    case Subcommand::swap: {
      const auto s = root.child(
          "experiment", {"protocol", "initial_nbar", "cutoffs", "frame", "samples"});
      auto& p = rc.swap;
      initial_nbar(s, p.nbar_i, p.nbar_j);
      cutoffs(s, p.cutoff_i, p.cutoff_j);
      const auto frame = s.text("frame").value_or("rwa");
      if (frame == "full")
        p.full_frame = true;
      else if (frame != "rwa")
        ctx.error(s.at("frame"), "expected rwa or full");
      const auto n = s.integer("samples").value_or(91);
      if (n < 2) ctx.error(s.at("samples"), "must be >= 2");
      p.samples = std::size_t(std::max(n, 2LL));
      // each mode receives the other's occupation
      const double hot = std::max(p.nbar_i, p.nbar_j);
      truncation(ctx, s.at("cutoffs"), hot, p.cutoff_i);
      truncation(ctx, s.at("cutoffs"), hot, p.cutoff_j);
      break;
    }
    case Subcommand::cool: {
      const auto s = root.child("experiment",
                                {"protocol", "placement", "cycles", "cooling_target",
                                 "cool_duration_s", "post_cool_delay_s", "initial_nbar",
                                 "cutoffs"});
      auto& p = rc.cool;
      auto& c = p.schedule;
      guarded(ctx, s.at("placement"), [&] {
        c.placement = swap_placement_from_string(s.text("placement").value_or("interleaved"));
      });
      c.cycles = int(s.integer("cycles").value_or(8));
      c.cooling_target = s.number("cooling_target", rc.noise.cooling_target);
      c.cool_duration = s.number("cool_duration_s", 200e-6);
      c.post_cool_delay = s.number("post_cool_delay_s", 20e-6);
      initial_nbar(s, p.nbar_primary, p.nbar_secondary);
      cutoffs(s, p.cutoff_primary, p.cutoff_secondary);
      guarded(ctx, path, [&] { c.validate(); });
      const double hot = std::max(p.nbar_primary, p.nbar_secondary);
      truncation(ctx, s.at("cutoffs"), hot, p.cutoff_primary);
      truncation(ctx, s.at("cutoffs"), hot, p.cutoff_secondary);
      break;
    }
    case Subcommand::heatrate: {
      const auto s = root.child("experiment", {"protocol", "readout", "waits_s", "initial_nbar",
                                               "cool_duration_s", "post_cool_delay_s"});
      auto& e = rc.heatrate;
      e.modes = rc.modes;
      guarded(ctx, s.at("readout"), [&] {
        e.readout = readout_from_string(s.text("readout").value_or("double_swap_via_x"));
      });
      e.waits = s.grid("waits_s").value_or(std::vector<double>{});
      if (!s.has("waits_s"))
        for (int k = 0; k <= 20; ++k) e.waits.push_back(k * 1e-4);
      e.shots = rc.shots;
      e.seed = rc.seed;
      e.coupling = rc.coupling;
      e.rabi_frequency = rc.probe.rabi_frequency;
      e.pulse_area = rc.pulse_area;
      e.coherence_time = rc.probe.coherence_time;
      initial_nbar(s, e.initial_nbar_primary, e.initial_nbar_secondary);
      if (!s.has("initial_nbar")) e.initial_nbar_primary = e.initial_nbar_secondary = 6.0;
      e.cool_duration = s.number("cool_duration_s", 1e-3);
      e.post_cool_delay = s.number("post_cool_delay_s", 20e-6);
      if (!ctx.failed()) guarded(ctx, path, [&] { e.validate(); });
      break;
    }
    case Subcommand::crossing: {
      const auto s = root.child("experiment", {"protocol", "detunings_hz", "probe_detunings_hz",
                                               "linewidth_hz", "contrast", "sideband",
                                               "initial_nbar"});
      auto& p = rc.crossing;
      if (auto g = s.grid("detunings_hz", two_pi))
        p.detunings = *g;
      else
        ctx.error(s.at("detunings_hz"), "required");
      if (auto g = s.grid("probe_detunings_hz", two_pi))
        p.probe_detunings = *g;
      else
        ctx.error(s.at("probe_detunings_hz"), "required");
      auto& o = p.spectrum;
      o.linewidth = s.angular_hz("linewidth_hz").value_or(angular(1e3));
      positive(ctx, s.at("linewidth_hz"), o.linewidth);
      o.contrast = s.number("contrast", 0.5);
      if (!(o.contrast > 0.0 && o.contrast <= 1.0)) ctx.error(s.at("contrast"), "must lie in (0, 1]");
      guarded(ctx, s.at("sideband"), [&] {
        o.sideband = sideband_from_string(s.text("sideband").value_or("blue"));
        if (o.sideband == Sideband::carrier) throw ValidationError("must be red or blue");
      });
      initial_nbar(s, o.nbar_i, o.nbar_j);
      o.shots = rc.shots;
      o.seed = rc.seed;
      if (p.probe_detunings.size() < 8 && s.has("probe_detunings_hz"))
        ctx.error(s.at("probe_detunings_hz"), "need at least 8 points");
      for (std::size_t k = 1; k < p.probe_detunings.size(); ++k)
        if (!(p.probe_detunings[k] > p.probe_detunings[k - 1])) {
          ctx.error(s.at("probe_detunings_hz"), "must increase");
          break;
        }
      break;
    }
    case Subcommand::bessel: {
      const auto s = root.child("experiment", {"protocol", "amplitudes_v", "modulation_index",
                                               "coupling_pair", "rabi_noise"});
      auto& p = rc.bessel;
      if (auto m = s.text("coupling_pair"))
        if (auto pr = parse_pair(ctx, s.at("coupling_pair"), *m)) p.options.coupling = *pr;
      p.options.rabi_noise = s.number("rabi_noise", 0.0);
      nonnegative(ctx, s.at("rabi_noise"), p.options.rabi_noise);
      p.options.seed = rc.seed;
      if (s.has("amplitudes_v") == s.has("modulation_index")) {
        ctx.error(s.at("amplitudes_v"), "give exactly one of amplitudes_v and modulation_index");
        break;
      }
      if (s.has("amplitudes_v")) {
        p.amplitudes = s.grid("amplitudes_v").value_or(std::vector<double>{});
      } else if (auto ka = s.grid("modulation_index"); ka && !ctx.failed()) {
        guarded(ctx, s.at("modulation_index"), [&] {
          DrivePulse unit = rc.drive;
          unit.amplitude = 1.0;
          const double per_volt =
              rc.trap.laser_wavenumber * projected_driven_amplitude(rc.trap, unit);
          if (!(per_volt > 0.0)) throw ValidationError("drive produces no driven motion");
          for (double v : *ka) p.amplitudes.push_back(v / per_volt);
        });
      }
      for (double a : p.amplitudes)
        if (!(a >= 0.0)) {
          ctx.error(s.at(s.has("amplitudes_v") ? "amplitudes_v" : "modulation_index"),
                    "must be >= 0");
          break;
        }
      break;
    }
    case Subcommand::squeeze: {
      const auto s = root.child("experiment", {"protocol", "times_s", "gt", "cutoff"});
      auto& p = rc.squeeze;
      if (s.has("times_s") == s.has("gt")) {
        ctx.error(s.at("times_s"), "give exactly one of times_s and gt");
      } else if (s.has("times_s")) {
        p.times = s.grid("times_s").value_or(std::vector<double>{});
      } else if (rc.coupling > 0.0) {
        for (double v : s.grid("gt").value_or(std::vector<double>{}))
          p.times.push_back(v / rc.coupling);
      }
      for (double t : p.times)
        if (!(t >= 0.0)) {
          ctx.error(s.at(s.has("gt") ? "gt" : "times_s"), "must be >= 0");
          break;
        }
      const auto c = s.integer("cutoff").value_or(0);
      if (c < 0) ctx.error(s.at("cutoff"), "must be >= 0");
      p.cutoff = std::size_t(std::max(c, 0LL));
      break;
    }
  }
}

void advisories(Context& ctx, const RunConfig& rc) {
  if (rc.coupling > 0.0) {
    const double w = std::min(rc.trap.frequency(rc.modes.first), rc.trap.frequency(rc.modes.second));
    const double ratio = rc.coupling / w;
    const bool full = rc.subcommand == Subcommand::swap && rc.swap.full_frame;
    if (ratio > 0.01 && !full) {
      std::ostringstream os;
      os << "g/omega = " << ratio << " exceeds 0.01; the rotating-wave approximation may fail,"
         << " use full-frame simulation (experiment.frame: full)";
      ctx.warn("drive.coupling_hz", os.str());
    }
  }
}

void emit_map3(YAML::Emitter& out, const char* key, const std::array<double, 3>& v,
               double scale = 1.0) {
  out << YAML::Key << key << YAML::Value << YAML::BeginMap;
  for (int a = 0; a < 3; ++a) {
    out << YAML::Key << to_string(Axis(a)) << YAML::Value;
    if (std::isinf(v[a]))
      out << "none";
    else
      out << v[a] * scale;
  }
  out << YAML::EndMap;
}

template <class T>
void emit_list(YAML::Emitter& out, const char* key, const std::vector<T>& v, double scale = 1.0) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& x : v) out << x * scale;
  out << YAML::EndSeq;
}

std::string resolved_yaml(const RunConfig& rc) {
  YAML::Emitter out;
  out.SetDoublePrecision(12);
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << rc.seed;
  out << YAML::Key << "shots" << YAML::Value << rc.shots;

  const TrapConfig& t = rc.trap;
  out << YAML::Key << "trap" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mass_kg" << YAML::Value << t.mass;
  out << YAML::Key << "charge_e" << YAML::Value << t.charge / constants::elementary_charge;
  emit_map3(out, "frequencies_hz", t.omega, 1.0 / two_pi);
  out << YAML::Key << "curvature_m" << YAML::Value << YAML::BeginMap;
  for (auto [a, b] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
    out << YAML::Key << pair_key(Axis(a), Axis(b)) << YAML::Value;
    if (std::isinf(t.curvature[a][b]))
      out << "none";
    else
      out << t.curvature[a][b] * t.curvature_sign[a][b];
  }
  out << YAML::EndMap;
  emit_map3(out, "linear_m", t.linear);
  out << YAML::Key << "laser" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "projection" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << t.laser_projection[0] << t.laser_projection[1] << t.laser_projection[2] << YAML::EndSeq;
  out << YAML::Key << "wavelength_m" << YAML::Value << two_pi / t.laser_wavenumber;
  out << YAML::EndMap << YAML::EndMap;

  const DrivePulse& d = rc.drive;
  out << YAML::Key << "drive" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "modes" << YAML::Value << pair_key(rc.modes.first, rc.modes.second);
  out << YAML::Key << "coupling_hz" << YAML::Value << rc.coupling / two_pi;
  out << YAML::Key << "amplitude_v" << YAML::Value << d.amplitude;
  out << YAML::Key << "frequency_hz" << YAML::Value << d.frequency / two_pi;
  out << YAML::Key << "phase_rad" << YAML::Value << d.phase;
  out << YAML::Key << "envelope" << YAML::Value << to_string(d.envelope);
  out << YAML::Key << "duration_s" << YAML::Value << d.duration;
  out << YAML::EndMap;

  out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
  emit_map3(out, "heating_rate", rc.noise.heating_rate);
  out << YAML::Key << "cooling_target" << YAML::Value << rc.noise.cooling_target;
  out << YAML::EndMap;

  const LaserProbe& p = rc.probe;
  out << YAML::Key << "probe" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << to_string(p.mode);
  out << YAML::Key << "rabi_frequency_hz" << YAML::Value << p.rabi_frequency / two_pi;
  out << YAML::Key << "pulse_time_s" << YAML::Value << p.pulse_time;
  out << YAML::Key << "pulse_area" << YAML::Value << rc.pulse_area;
  out << YAML::Key << "coherence_time_s" << YAML::Value;
  if (std::isinf(p.coherence_time))
    out << "inf";
  else
    out << p.coherence_time;
  out << YAML::Key << "detuning_hz" << YAML::Value << p.detuning / two_pi;
  out << YAML::EndMap;

  out << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "protocol" << YAML::Value << to_string(rc.subcommand);
  switch (rc.subcommand) {
    case Subcommand::swap:
      out << YAML::Key << "initial_nbar" << YAML::Value << YAML::Flow << YAML::BeginSeq
          << rc.swap.nbar_i << rc.swap.nbar_j << YAML::EndSeq;
      out << YAML::Key << "cutoffs" << YAML::Value << YAML::Flow << YAML::BeginSeq
          << rc.swap.cutoff_i << rc.swap.cutoff_j << YAML::EndSeq;
      out << YAML::Key << "frame" << YAML::Value << (rc.swap.full_frame ? "full" : "rwa");
      out << YAML::Key << "samples" << YAML::Value << rc.swap.samples;
      break;
    case Subcommand::cool: {
      const auto& c = rc.cool.schedule;
      out << YAML::Key << "placement" << YAML::Value << to_string(c.placement);
      out << YAML::Key << "cycles" << YAML::Value << c.cycles;
      out << YAML::Key << "cooling_target" << YAML::Value << c.cooling_target;
      out << YAML::Key << "cool_duration_s" << YAML::Value << c.cool_duration;
      out << YAML::Key << "post_cool_delay_s" << YAML::Value << c.post_cool_delay;
      out << YAML::Key << "initial_nbar" << YAML::Value << YAML::Flow << YAML::BeginSeq
          << rc.cool.nbar_primary << rc.cool.nbar_secondary << YAML::EndSeq;
      out << YAML::Key << "cutoffs" << YAML::Value << YAML::Flow << YAML::BeginSeq
          << rc.cool.cutoff_primary << rc.cool.cutoff_secondary << YAML::EndSeq;
      break;
    }
    case Subcommand::heatrate: {
      const auto& e = rc.heatrate;
      out << YAML::Key << "readout" << YAML::Value << to_string(e.readout);
      emit_list(out, "waits_s", e.waits);
      out << YAML::Key << "initial_nbar" << YAML::Value << YAML::Flow << YAML::BeginSeq
          << e.initial_nbar_primary << e.initial_nbar_secondary << YAML::EndSeq;
      out << YAML::Key << "cool_duration_s" << YAML::Value << e.cool_duration;
      out << YAML::Key << "post_cool_delay_s" << YAML::Value << e.post_cool_delay;
      break;
    }
    case Subcommand::crossing: {
      const auto& c = rc.crossing;
      emit_list(out, "detunings_hz", c.detunings, 1.0 / two_pi);
      emit_list(out, "probe_detunings_hz", c.probe_detunings, 1.0 / two_pi);
      out << YAML::Key << "linewidth_hz" << YAML::Value << c.spectrum.linewidth / two_pi;
      out << YAML::Key << "contrast" << YAML::Value << c.spectrum.contrast;
      out << YAML::Key << "sideband" << YAML::Value << to_string(c.spectrum.sideband);
      out << YAML::Key << "initial_nbar" << YAML::Value << YAML::Flow << YAML::BeginSeq
          << c.spectrum.nbar_i << c.spectrum.nbar_j << YAML::EndSeq;
      break;
    }
    case Subcommand::bessel:
      emit_list(out, "amplitudes_v", rc.bessel.amplitudes);
      out << YAML::Key << "coupling_pair" << YAML::Value
          << pair_key(rc.bessel.options.coupling.first, rc.bessel.options.coupling.second);
      out << YAML::Key << "rabi_noise" << YAML::Value << rc.bessel.options.rabi_noise;
      break;
    case Subcommand::squeeze:
      emit_list(out, "times_s", rc.squeeze.times);
      out << YAML::Key << "cutoff" << YAML::Value << rc.squeeze.cutoff;
      break;
  }
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "directory" << YAML::Value << rc.output_directory;
  out << YAML::Key << "prefix" << YAML::Value << rc.prefix;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

YAML::Node load_text(const std::string& text) {
  try {
    YAML::Node n = YAML::Load(text);
    if (!n.IsDefined() || n.IsNull()) return YAML::Node(YAML::NodeType::Map);
    return n;
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << "YAML syntax error at line " << e.mark.line + 1 << ": " << e.msg;
    throw ConfigError({{Diagnostic::Level::error, "<file>", os.str()}});
  }
}

/// Parse everything, collecting diagnostics instead of throwing.
void parse_all(YAML::Node root_node, RunConfig& rc, Context& ctx) {
  const Section root(ctx, root_node, "",
                     {"seed", "shots", "output", "trap", "drive", "noise", "probe", "experiment"});
  if (auto seed = root.integer("seed")) {
    if (*seed < 0) ctx.error("seed", "must be >= 0");
    rc.seed = std::uint64_t(*seed);
  }
  if (auto shots = root.integer("shots")) {
    if (*shots < 1) ctx.error("shots", "must be >= 1");
    rc.shots = std::size_t(std::max(*shots, 1LL));
  }
  const auto out = root.child("output", {"directory", "prefix"});
  rc.output_directory = out.text("directory").value_or("");
  rc.prefix = out.text("prefix").value_or(to_string(rc.subcommand));
  if (rc.prefix.empty() || rc.prefix.find('/') != std::string::npos)
    ctx.error(out.at("prefix"), "must be a non-empty file name stem");

  parse_trap(root, rc);
  if (ctx.failed()) return;  // everything below depends on the trap
  parse_drive(root, rc);
  parse_noise(root, rc);
  parse_probe(root, rc);
  if (ctx.failed()) return;
  parse_experiment(root, rc);
  advisories(ctx, rc);
}

}  // namespace

const char* to_string(Subcommand s) noexcept {
  switch (s) {
    case Subcommand::swap: return "swap";
    case Subcommand::cool: return "cool";
    case Subcommand::heatrate: return "heatrate";
    case Subcommand::crossing: return "crossing";
    case Subcommand::bessel: return "bessel";
    case Subcommand::squeeze: return "squeeze";
  }
  return "?";
}

Subcommand subcommand_from_string(const std::string& name) {
  for (auto s : {Subcommand::swap, Subcommand::cool, Subcommand::heatrate, Subcommand::crossing,
                 Subcommand::bessel, Subcommand::squeeze})
    if (name == to_string(s)) return s;
  throw ValidationError("unknown protocol '" + name + "'");
}

std::string Diagnostic::str() const {
  return std::string(level == Level::error ? "error" : "warning") + ": " + path + ": " + message;
}

namespace {
std::string first_error(const std::vector<Diagnostic>& d) {
  for (const auto& x : d)
    if (x.level == Diagnostic::Level::error) {
      std::string s = x.path + ": " + x.message;
      std::size_t more = 0;
      for (const auto& y : d) more += y.level == Diagnostic::Level::error;
      if (more > 1) s += " (and " + std::to_string(more - 1) + " more)";
      return s;
    }
  return "invalid configuration";
}
}  // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diags)
    : ValidationError(first_error(diags)), diags_(std::move(diags)) {}

double RunConfig::probe_time(Axis mode) const {
  if (probe.pulse_time > 0.0) return probe.pulse_time;
  return pulse_area / (probe.rabi_frequency * probe.lamb_dicke[static_cast<int>(mode)]);
}

Override parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError({{Diagnostic::Level::error, text, "override must look like key.path=value"}});
  return {text.substr(0, eq), text.substr(eq + 1)};
}

RunConfig parse_config(const std::string& yaml_text, Subcommand sub,
                       const std::vector<Override>& overrides, std::vector<Diagnostic>* warnings) {
  YAML::Node root = load_text(yaml_text);
  for (const auto& o : overrides) apply_override(root, o);
  RunConfig rc;
  rc.subcommand = sub;
  Context ctx;
  if (root.IsMap()) {
    const auto e = root["experiment"];
    if (e.IsDefined() && e.IsMap() && e["protocol"].IsDefined() && e["protocol"].IsScalar() &&
        e["protocol"].as<std::string>() != to_string(sub))
      ctx.error("experiment.protocol",
                "'" + e["protocol"].as<std::string>() + "' does not match subcommand " +
                    to_string(sub));
  }
  parse_all(root, rc, ctx);
  if (ctx.failed()) throw ConfigError(ctx.diags);
  if (warnings)
    for (const auto& d : ctx.diags) warnings->push_back(d);
  rc.resolved = resolved_yaml(rc);
  return rc;
}

RunConfig load_config(const std::string& path, Subcommand sub,
                      const std::vector<Override>& overrides, std::vector<Diagnostic>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), sub, overrides, warnings);
}

std::vector<Diagnostic> check_config(const std::string& yaml_text,
                                     const std::vector<Override>& overrides) {
  YAML::Node root;
  try {
    root = load_text(yaml_text);
    for (const auto& o : overrides) apply_override(root, o);
  } catch (const ConfigError& e) {
    return e.diagnostics();
  }
  Context ctx;
  RunConfig rc;
  std::optional<Subcommand> sub;
  if (root.IsMap() && root["experiment"].IsMap() && root["experiment"]["protocol"].IsScalar()) {
    try {
      sub = subcommand_from_string(root["experiment"]["protocol"].as<std::string>());
    } catch (const ValidationError& e) {
      ctx.error("experiment.protocol", e.what());
    }
  } else {
    ctx.error("experiment.protocol", "required");
  }
  if (sub) {
    rc.subcommand = *sub;
    parse_all(root, rc, ctx);
  }
  return ctx.diags;
}

}  // namespace modecouple::cli
