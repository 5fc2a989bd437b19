// Acceptance checks: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "resonant/engine.hpp"
#include "resonant/gesture.hpp"
#include "resonant/level.hpp"
#include "resonant/protocol.hpp"
#include "resonant/resonance.hpp"
#include "resonant/simplicial.hpp"
#include "resonant/wav.hpp"
#include "support/fixtures.hpp"
#include "support/geometry.hpp"
#include "support/signals.hpp"

using namespace resonant;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome decay_law() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const double fs = 44100.0, freq = 1000.0;
  double worst = 0.0;
  for (double t60 : {0.1, 0.5, 2.0, 5.0}) {
    ResonatorBank bank(ResonanceModel("decay", {{freq, 1.0, t60}}), fs);
    const auto n = static_cast<std::size_t>((1.3 * t60 + 0.05) * fs);
    std::vector<double> x(n, 0.0), y(n);
    x[0] = 1.0;
    bank.process(x, y);
    const double measured = testsig::measured_t60(y, fs, freq, -70.0);
    const double err = std::abs(measured - t60) / t60;
    worst = std::max(worst, err);
    o.require(err <= 0.05, "t60 " + fmt(t60) + " measured " + fmt(measured));
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed < 10.0, "runtime " + fmt(elapsed) + " s");
  if (o.pass) o.detail = "worst relative error " + fmt(worst) + ", " + fmt(elapsed) + " s";
  return o;
}

Outcome coupling_constant() {
  Outcome o;
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> exponent(-3.0, 4.0);
  const double k = std::log(1000.0) / std::numbers::pi;
  double worst_id = 0.0, worst_k = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double b = std::pow(10.0, exponent(rng));
    const double t60 = decay_from_bandwidth(b);
    worst_id = std::max(worst_id, std::abs(bandwidth_from_decay(t60) - b) / b);
    worst_k = std::max(worst_k, std::abs(b * t60 - k) / k);
  }
  o.require(worst_id <= 1e-12, "round trip error " + fmt(worst_id));
  o.require(worst_k <= 1e-12, "B*t60 error " + fmt(worst_k));
  if (o.pass) o.detail = "round trip " + fmt(worst_id) + ", B*t60 " + fmt(worst_k);
  return o;
}

Outcome follower_anchor() {
  Outcome o;
  const AmplitudeFollower f(44100.0, 130.0);
  const double rate = f.reports_per_second(EngineConfig{}.block_size);
  o.require(f.window_len() == 340, "window " + std::to_string(f.window_len()));
  o.require(rate >= 130.0, "rate " + fmt(rate));
  if (o.pass) o.detail = "window 340, " + fmt(rate) + " reports/s";
  return o;
}

std::vector<Point2> random_points(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

Outcome simplicial_suite() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-5.0, 5.0), u(0.0, 1.0);
  double worst_affine = 0.0, worst_edge = 0.0;
  int delaunay_violations = 0, vertex_mismatches = 0;
  for (int instance = 0; instance < 30; ++instance) {
    const auto pts = random_points(rng, 20);
    const std::size_t dim = 4;
    std::vector<double> m(2 * dim), b(dim);
    for (auto& v : m) v = coef(rng);
    for (auto& v : b) v = coef(rng);
    std::vector<PointPair> pairs;
    for (const auto& p : pts) {
      std::vector<double> q(dim);
      for (std::size_t k = 0; k < dim; ++k) q[k] = m[2 * k] * p.x + m[2 * k + 1] * p.y + b[k];
      pairs.push_back({p, q});
    }
    const auto map = validate_map(pairs);

    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto v = map.interpolate(pts[i]);
      for (std::size_t k = 0; k < dim; ++k) vertex_mismatches += v[k] != pairs[i].codomain[k];
    }

    for (const auto& t : map.triangles()) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i == t[0] || i == t[1] || i == t[2]) continue;
        delaunay_violations += testgeo::strictly_inside_circumcircle(pts[t[0]], pts[t[1]], pts[t[2]], pts[i], 1e-9);
      }
      for (int s = 0; s < 5; ++s) {
        double l1 = u(rng), l2 = u(rng);
        if (l1 + l2 > 1.0) {
          l1 = 1.0 - l1;
          l2 = 1.0 - l2;
        }
        const double l0 = 1.0 - l1 - l2;
        const Point2 p{l0 * pts[t[0]].x + l1 * pts[t[1]].x + l2 * pts[t[2]].x,
                       l0 * pts[t[0]].y + l1 * pts[t[1]].y + l2 * pts[t[2]].y};
        const auto v = map.interpolate(p);
        for (std::size_t k = 0; k < dim; ++k) {
          worst_affine = std::max(worst_affine, std::abs(v[k] - (m[2 * k] * p.x + m[2 * k + 1] * p.y + b[k])));
        }
      }
    }

    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> owners;
    for (std::size_t k = 0; k < map.triangles().size(); ++k) {
      const auto& t = map.triangles()[k];
      for (int e = 0; e < 3; ++e) {
        owners[{std::min(t[e], t[(e + 1) % 3]), std::max(t[e], t[(e + 1) % 3])}].push_back(k);
      }
    }
    for (const auto& [edge, tris] : owners) {
      if (tris.size() != 2) continue;
      for (double s : {0.1, 0.37, 0.5, 0.81}) {
        const Point2 p{(1 - s) * pts[edge.first].x + s * pts[edge.second].x,
                       (1 - s) * pts[edge.first].y + s * pts[edge.second].y};
        const auto left = map.evaluate_in(tris[0], p), right = map.evaluate_in(tris[1], p);
        for (std::size_t k = 0; k < dim; ++k) worst_edge = std::max(worst_edge, std::abs(left[k] - right[k]));
      }
    }
  }
  const double elapsed = seconds_since(start);
  o.require(vertex_mismatches == 0, std::to_string(vertex_mismatches) + " vertex mismatches");
  o.require(worst_affine <= 1e-9, "affine error " + fmt(worst_affine));
  o.require(worst_edge <= 1e-9, "edge discontinuity " + fmt(worst_edge));
  o.require(delaunay_violations == 0, std::to_string(delaunay_violations) + " circumcircle violations");
  o.require(elapsed < 5.0, "runtime " + fmt(elapsed) + " s");
  if (o.pass) {
    o.detail = "affine " + fmt(worst_affine) + ", edge " + fmt(worst_edge) + ", " + fmt(elapsed) + " s";
  }
  return o;
}

Outcome codec_suite() {
  Outcome o;
  std::vector<std::uint8_t> want;
  for (char c : std::string("/ViolinControl/Param/Z")) want.push_back(static_cast<std::uint8_t>(c));
  want.insert(want.end(), {0, 0, ',', 'i', 0, 0, 0, 0, 0, 100});
  const auto got = encode({"/ViolinControl/Param/Z", {std::int32_t{100}}});
  o.require(got.size() == 32 && got == want, "reference packet differs");

  std::mt19937 rng(3);
  std::uniform_int_distribution<int> len(1, 10), kind(0, 2), nargs(0, 5), ch('a', 'z');
  std::uniform_int_distribution<std::int32_t> ints(std::numeric_limits<std::int32_t>::min(),
                                                   std::numeric_limits<std::int32_t>::max());
  std::uniform_real_distribution<float> floats(-1e3f, 1e3f);
  int mismatches = 0, misaligned = 0;
  for (int i = 0; i < 1000; ++i) {
    ControlMessage m;
    for (int s = 0, segs = 1 + i % 3; s < segs; ++s) {
      m.address += '/';
      for (int c = 0, n = len(rng); c < n; ++c) m.address += static_cast<char>(ch(rng));
    }
    for (int a = 0, n = nargs(rng); a < n; ++a) {
      switch (kind(rng)) {
        case 0:
          m.args.emplace_back(ints(rng));
          break;
        case 1:
          m.args.emplace_back(floats(rng));
          break;
        default:
          m.args.emplace_back(std::string(static_cast<std::size_t>(len(rng) - 1), static_cast<char>(ch(rng))));
      }
    }
    const auto packet = encode(m);
    misaligned += packet.size() % 4 != 0;
    mismatches += !(decode(packet) == m);
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " round-trip mismatches");
  o.require(misaligned == 0, std::to_string(misaligned) + " misaligned packets");
  if (o.pass) o.detail = "32-byte reference exact, 1000 round trips";
  return o;
}

Outcome subscription_semantics() {
  Outcome o;
  ParameterCatalog catalog;
  for (const auto& a : canonical_parameter_addresses()) catalog.add(a, [] { return std::vector<float>{0.5f}; });
  const auto request = [](const std::string& name, std::int32_t interval) {
    return ControlMessage{std::string(addr::kParam) + name, {interval}};
  };

  SubscriptionRegistry reg;
  apply_request(reg, catalog, request("Amplitude", 30));
  apply_request(reg, catalog, request("Z", 0));
  std::map<std::string, std::vector<int>> per_second;
  for (std::int64_t t = 0; t < 10000; t += 5) {
    for (const auto& m : tick(reg, catalog, t)) {
      auto& counts = per_second[m.address];
      counts.resize(10, 0);
      ++counts[static_cast<std::size_t>(t / 1000)];
    }
  }
  for (int c : per_second["/ViolinControl/Param/Amplitude"]) {
    o.require(c == 33 || c == 34, "30 ms subscription gave " + std::to_string(c) + "/s");
  }
  for (int c : per_second["/ViolinControl/Param/Z"]) {
    o.require(c == 200, "every-tick subscription gave " + std::to_string(c) + "/s");
  }

  apply_request(reg, catalog, request("Amplitude", -1));
  apply_request(reg, catalog, request("Z", -1));
  std::size_t after = 0;
  for (std::int64_t t = 10000; t < 20000; t += 5) after += tick(reg, catalog, t).size();
  o.require(after == 0, std::to_string(after) + " reports after halt");
  o.require(reg.size() == 0, "halted entries remain");
  if (o.pass) o.detail = "33-34/s at 30 ms, 200/s every tick, halt silent";
  return o;
}

std::vector<std::vector<std::string>> log_rows(const std::string& path) {
  std::istringstream in(fixture::read_text(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("time_s", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

Outcome end_to_end_offline() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  fixture::TempDir dir("accept");
  const double fs = 44100.0;
  const double freqs[5] = {300, 500, 800, 1200, 1700};

  std::ostringstream model;
  model << "@f0 300\n";
  for (double f : freqs) model << f << " 1 0.3\n";
  const double corners[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<std::vector<double>> rows(4);
  std::ostringstream map;
  map.precision(17);
  map << "n 15\n";
  for (int c = 0; c < 4; ++c) {
    map << corners[c][0] << ' ' << corners[c][1] << " :";
    for (int k = 0; k < 5; ++k) {
      for (double v : {0.5 + 0.1 * c, freqs[k] * (1.0 + 0.05 * c), 0.1 + 0.08 * c}) {
        rows[c].push_back(v);
        map << ' ' << v;
      }
    }
    map << '\n';
  }

  // Exponential sweep 200 -> 2000 Hz across every resonance.
  const double seconds = 5.0, f0 = 200.0, f1 = 2000.0;
  const auto n = static_cast<std::size_t>(seconds * fs);
  std::vector<double> input(n);
  const double k = std::log(f1 / f0) / seconds;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    input[i] = 0.25 * std::sin(2.0 * std::numbers::pi * f0 * (std::exp(k * t) - 1.0) / k);
  }

  RenderJob job;
  job.input_path = dir.file("sweep.wav");
  job.trajectory_path = dir.file("square.csv");
  job.model_path = dir.file("five.res");
  job.map_path = dir.file("square.map");
  job.output_path = dir.file("out.wav");
  write_wav(job.input_path, 44100, input);
  fixture::write_text(job.model_path, model.str());
  fixture::write_text(job.map_path, map.str());
  // Dwell at each corner, move linearly between them.
  fixture::write_text(job.trajectory_path, fixture::trajectory_text({{0.0, 0, 0, 1},
                                                                     {0.5, 0, 0, 1},
                                                                     {1.5, 1, 0, 1},
                                                                     {2.0, 1, 0, 1},
                                                                     {3.0, 1, 1, 1},
                                                                     {3.5, 1, 1, 1},
                                                                     {4.5, 0, 1, 1},
                                                                     {5.0, 0, 1, 1}}));

  EngineConfig config;
  config.seed = 5;
  const auto summary = render_offline(job, config);
  const auto first = fixture::read_text(job.output_path);
  const auto first_log = fixture::read_text(summary.log_path);
  render_offline(job, config);
  o.require(fixture::read_text(job.output_path) == first, "output differs between runs");
  o.require(fixture::read_text(summary.log_path) == first_log, "log differs between runs");

  int vertex_rows = 0, vertex_mismatches = 0;
  for (const auto& row : log_rows(summary.log_path)) {
    const double lat = std::stod(row[4]), lon = std::stod(row[5]);
    for (int c = 0; c < 4; ++c) {
      if (lat != corners[c][0] || lon != corners[c][1]) continue;
      ++vertex_rows;
      for (std::size_t i = 0; i < 15; ++i) vertex_mismatches += std::stod(row[8 + i]) != rows[c][i];
    }
  }
  o.require(vertex_rows > 0, "no log rows at vertices");
  o.require(vertex_mismatches == 0, std::to_string(vertex_mismatches) + " vertex parameter mismatches");

  const auto out = read_wav(job.output_path).samples;
  const std::size_t settle = static_cast<std::size_t>(0.5 * fs);
  const std::span<const double> in_tail(input.data() + settle, n - settle), out_tail(out.data() + settle, n - settle);
  const double level_db = testsig::db(testsig::rms(out_tail) / testsig::rms(in_tail));
  o.require(std::abs(level_db) <= 3.0, "output level " + fmt(level_db) + " dB");
  const double elapsed = seconds_since(start);
  o.require(elapsed < 30.0, "runtime " + fmt(elapsed) + " s");
  if (o.pass) {
    o.detail = "bit-identical, " + std::to_string(vertex_rows) + " vertex rows exact, level " + fmt(level_db) +
               " dB, " + fmt(elapsed) + " s";
  }
  return o;
}

Outcome gesture_suite() {
  Outcome o;
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> z(-0.5, 1.5);
  std::uniform_int_distribution<int> length(1, 100);
  int min_mismatches = 0;
  const AltitudeConfig cfg{1.0, 0.0, 0.02};
  for (int seq = 0; seq < 1000; ++seq) {
    AltitudeState state(cfg);
    std::vector<double> since;
    for (int i = 0, n = length(rng); i < n; ++i) {
      const double v = z(rng);
      state.update(v);
      if (v > cfg.normal_altitude + cfg.reset_margin) since.clear();
      since.push_back(v);
      min_mismatches += state.running_min() != *std::min_element(since.begin(), since.end());
    }
  }
  o.require(min_mismatches == 0, std::to_string(min_mismatches) + " running-minimum mismatches");

  std::normal_distribution<double> step(0.0, 0.02);
  const double zt = 0.5, h = 0.05;
  OctaveToggle toggle(zt, h);
  double level = zt;
  int transitions = 0, crossings = 0, side = 0;
  bool last = toggle.on();
  for (int i = 0; i < 100000; ++i) {
    level += step(rng);
    const bool on = toggle.update(level);
    transitions += on != last;
    last = on;
    const int now = level < zt - h / 2 ? -1 : (level > zt + h / 2 ? 1 : side);
    if (now != side && (side != 0 || now == -1)) ++crossings;
    side = now;
  }
  o.require(transitions <= crossings,
            std::to_string(transitions) + " transitions over " + std::to_string(crossings) + " crossings");

  const double speed = bow_speed({0, 0, 0}, {0.03, 0, 0.04}, 0.01);
  o.require(speed == 5.0, "bow speed " + fmt(speed));
  if (o.pass) {
    o.detail = "1000 sequences exact, " + std::to_string(transitions) + " transitions <= " +
               std::to_string(crossings) + " crossings, bow speed 5";
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"decay law", decay_law},
      {"coupling constant", coupling_constant},
      {"follower anchor", follower_anchor},
      {"simplicial suite", simplicial_suite},
      {"codec suite", codec_suite},
      {"subscription semantics", subscription_semantics},
      {"end-to-end offline", end_to_end_offline},
      {"gesture suite", gesture_suite},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    failures += !outcome.pass;
    std::printf("%s %s: %s\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
