#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thurston/boundary.hpp"
#include "thurston/config.hpp"
#include "thurston/envelope.hpp"
#include "thurston/errors.hpp"
#include "thurston/metric.hpp"
#include "thurston/straighten.hpp"
#include "thurston/torus.hpp"
#include "thurston/track_io.hpp"

namespace thurston::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitDomain = 3;

// Fixed-format double so equal inputs give byte-identical outputs.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::vector<double> parse_doubles(const std::string& text, std::size_t n,
                                         const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (...) {
      throw InputError("cannot parse " + what + " '" + text + "'");
    }
  }
  if (n != 0 && out.size() != n) {
    throw InputError(what + " '" + text + "' needs " + std::to_string(n) + " comma-separated values");
  }
  return out;
}

inline TracePoint parse_point(const std::string& text) {
  auto v = parse_doubles(text, 3, "trace point");
  return TracePoint::create(v[0], v[1], v[2]);
}

inline Slope parse_slope(const std::string& text) {
  std::size_t slash = text.find('/');
  if (slash == std::string::npos) throw InputError("slope must look like p/q, got '" + text + "'");
  try {
    long p = std::stol(text.substr(0, slash));
    long q = std::stol(text.substr(slash + 1));
    return Slope::of(p, q);
  } catch (const InputError&) {
    throw;
  } catch (...) {
    throw InputError("cannot parse slope '" + text + "'");
  }
}

inline MeasuredSlope parse_measured(const std::string& text) {
  std::size_t colon = text.find(':');
  Slope s = parse_slope(colon == std::string::npos ? text : text.substr(0, colon));
  double w = 1.0;
  if (colon != std::string::npos) {
    try {
      w = std::stod(text.substr(colon + 1));
    } catch (...) {
      throw InputError("cannot parse weight in '" + text + "'");
    }
  }
  return MeasuredSlope::of(s, w);
}

inline MarkovRoot parse_root(const std::string& text) {
  if (text == "smaller") return MarkovRoot::kSmaller;
  if (text == "larger") return MarkovRoot::kLarger;
  throw InputError("root must be 'smaller' or 'larger', got '" + text + "'");
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("bad JSON in '" + path + "': " + e.what());
  }
  return j;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
}

// --- envelope command plumbing ---------------------------------------------

struct EnvelopeArgs {
  std::string x_text, y_text, rect_text;
  int res = 64;
  int depth = 12;
  double tol = 0.0;  // 0 = adaptive
  double gap = 0.0;  // 0 = config default
  std::string root_text = "smaller";
  std::string out_path;
  double width_tol = 2.0;
  std::string deltas_text = "0.1,0.05,0.025";

  void add_common(CLI::App* cmd, bool with_gap) {
    cmd->add_option("--x", x_text, "initial point x1,y1,z1")->required();
    cmd->add_option("--y", y_text, "terminal point x2,y2,z2")->required();
    cmd->add_option("--rect", rect_text, "chart rectangle x0,x1,y0,y1")->required();
    cmd->add_option("--res", res, "grid resolution per axis");
    cmd->add_option("--depth", depth, "slope enumeration depth");
    cmd->add_option("--tol", tol, "membership tolerance (0 = adaptive)");
    cmd->add_option("--root", root_text, "markov completion root (smaller|larger)");
    if (with_gap) cmd->add_option("--gap", gap, "cluster gap for classification");
  }

  Chart chart() const {
    auto r = parse_doubles(rect_text, 4, "rect");
    Chart c;
    c.x0 = r[0];
    c.x1 = r[1];
    c.y0 = r[2];
    c.y1 = r[3];
    c.res_x = res;
    c.res_y = res;
    c.root = parse_root(root_text);
    return c;
  }
};

inline std::string grid_csv(const EnvelopeSample& s, const BoundaryClassification* cls) {
  std::string out = "x,y,z,defect,member,label\n";
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const GridCell& c = s.cells[i];
    out += fmt(c.x) + "," + fmt(c.y) + ",";
    if (c.in_domain) {
      out += fmt(c.point.z) + "," + fmt(c.defect) + "," + (c.member ? "1" : "0");
    } else {
      out += "nan,nan,0";
    }
    out += ",";
    if (!c.in_domain) {
      out += "OUT";
    } else if (cls) {
      out += label_name(cls->labels[i]);
    } else {
      out += "NONE";
    }
    out += "\n";
  }
  return out;
}

inline json report_to_json(const EnvelopeReport& rep) {
  json corners = json::array();
  for (const auto& c : rep.corners) {
    corners.push_back({{"kind", c.kind},
                       {"x", c.cx},
                       {"y", c.cy},
                       {"cells", c.cells.size()},
                       {"diameter", c.diameter}});
  }
  return json{{"shape", shape_name(rep.shape)},
              {"bd_cluster_count", rep.bd_cluster_count},
              {"xy_opposite", rep.xy_opposite},
              {"dimension_estimate", rep.dimension_estimate},
              {"max_width_cells", rep.max_width_cells},
              {"member_count", rep.member_count},
              {"member_diameter", rep.member_diameter},
              {"degenerate_grid", rep.degenerate_grid},
              {"corners", corners}};
}

// --- selftest ---------------------------------------------------------------

// Quick in-binary property smoke of the key invariants; the full oracle and
// acceptance suites live under tests/.
inline bool run_selftest(std::uint64_t seed, std::ostream& out) {
  bool ok = true;
  auto check = [&](bool cond, const std::string& name) {
    out << (cond ? "PASS " : "FAIL ") << name << "\n";
    ok = ok && cond;
  };

  // Straightening round trip on the two reference fixtures.
  try {
    DecoratedTrack circle;
    circle.track.branches = {0, 1, 2, 3};
    circle.track.switches.push_back({{{0, 0}}, {{1, 0}, {2, 0}}});
    circle.track.switches.push_back({{{0, 1}}, {{1, 1}, {3, 0}}});
    circle.marks = {{0, BranchMark::kStump},
                    {1, BranchMark::kStump},
                    {2, BranchMark::kIsolated},
                    {3, BranchMark::kIsolated}};
    FarWeights f;
    f.isolated = {{2, Rational(3, 2)}, {3, Rational(3, 2)}};
    WeightSystem w = straighten_lift(circle, f);
    check(cut(circle, w) == f && check_switch_conditions(circle.track, w),
          "straighten round trip (orientable)");

    DecoratedTrack barbell;
    barbell.track.branches = {0, 1, 2, 3, 4};
    barbell.track.switches.push_back({{{0, 0}}, {{2, 0}, {2, 1}}});
    barbell.track.switches.push_back({{{1, 1}}, {{3, 0}, {3, 1}}});
    barbell.track.switches.push_back({{{0, 1}}, {{1, 0}, {4, 0}}});
    barbell.marks = {{0, BranchMark::kStump},
                     {1, BranchMark::kStump},
                     {2, BranchMark::kStump},
                     {3, BranchMark::kStump},
                     {4, BranchMark::kIsolated}};
    FarWeights g;
    g.isolated = {{4, Rational(5, 3)}};
    WeightSystem wb = straighten_lift(barbell, g);
    check(cut(barbell, wb) == g && check_switch_conditions(barbell.track, wb),
          "straighten round trip (non-orientable, halved weights stay rational)");
  } catch (const std::exception& e) {
    out << "FAIL straightening fixtures: " << e.what() << "\n";
    ok = false;
  }

  // Transportation-plan marginals.
  try {
    std::mt19937_64 rng(seed);
    bool marginals = true;
    for (int it = 0; it < 20; ++it) {
      std::vector<std::pair<HalfBranch, Rational>> ins, outs;
      Rational total;
      int n_in = 1 + rng() % 4;
      for (int i = 0; i < n_in; ++i) {
        Rational w(static_cast<std::int64_t>(rng() % 9), 1 + rng() % 5);
        ins.push_back({{i, 0}, w});
        total += w;
      }
      outs.push_back({{50, 0}, total});
      auto plan = pair_weights(ins, outs);
      Rational sum;
      for (const auto& [key, v] : plan) {
        (void)key;
        sum += v;
      }
      marginals = marginals && sum == total;
    }
    check(marginals, "transportation plan marginals");
  } catch (const std::exception& e) {
    out << "FAIL pair_weights: " << e.what() << "\n";
    ok = false;
  }

  // Metric axioms at the reference points.
  try {
    TracePoint x = TracePoint::create(3, 3, 3);
    TracePoint y = markov_complete(5, 3, MarkovRoot::kSmaller);
    check(thurston_distance(x, x, 8).value == 0.0, "self distance is zero");
    double d6 = thurston_distance(x, y, 6).value;
    double d12 = thurston_distance(x, y, 12).value;
    check(d12 >= d6, "depth monotone");
    check(std::abs(thurston_distance(x, y, 12).value - thurston_distance(y, x, 12).value) > 0.01,
          "asymmetry witness");
    double base = thurston_distance(x, y, 12).value;
    double refl = thurston_distance(reflect_point(x), reflect_point(y), 12).value;
    check(std::abs(base - refl) <= 1e-9, "mapping class invariance");
  } catch (const std::exception& e) {
    out << "FAIL metric axioms: " << e.what() << "\n";
    ok = false;
  }

  // Trace recursion base identities.
  try {
    TracePoint p = TracePoint::create(3, 3, 3);
    bool fricke = std::abs(trace_of_slope(p, Slope::of(1, 2)) - 6.0) < 1e-12 &&
                  std::abs(trace_of_slope(p, Slope::of(-1, 1)) - 6.0) < 1e-12;
    check(fricke, "fricke trace identities");
    LipschitzEstimate l = tree_lipschitz_constant(p, MeasuredSlope::of(Slope::of(1, 0), 1.0), 12);
    check(l.stabilized && l.value > 1.0, "tree lipschitz constant stabilizes");
  } catch (const std::exception& e) {
    out << "FAIL trace/boundary: " << e.what() << "\n";
    ok = false;
  }

  out << (ok ? "selftest OK" : "selftest FAILED") << "\n";
  return ok;
}

// --- dispatcher ---------------------------------------------------------------

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Thurston-metric envelope toolkit for the once-punctured torus"};
  app.require_subcommand(1);
  app.fallthrough();
  bool json_out = false;
  app.add_flag("--json", json_out, "emit a machine-readable JSON summary");

  RunConfig cfg = RunConfig::from_env();

  std::string from_text, to_text, point_text, slope_text, xy_text, root_text = "larger";
  std::string eta_text, mu_text, out_path, track_path, weights_path, far_path;
  int depth = cfg.depth;
  double tol = cfg.convergence_tol;
  double gap = cfg.cluster_gap;
  std::uint64_t seed = cfg.seed;

  // dist
  auto* dist = app.add_subcommand("dist", "Thurston distance estimate")->fallthrough();
  dist->add_option("--from", from_text)->required();
  dist->add_option("--to", to_text)->required();
  dist->add_option("--depth", depth);
  dist->add_option("--tol", tol);

  // profile
  auto* profile = app.add_subcommand("profile", "length-ratio profile as CSV")->fallthrough();
  profile->add_option("--from", from_text)->required();
  profile->add_option("--to", to_text)->required();
  profile->add_option("--depth", depth);
  profile->add_option("--out", out_path);

  // lamination
  auto* lamination = app.add_subcommand("lamination", "maximally stretched lamination estimate")->fallthrough();
  lamination->add_option("--from", from_text)->required();
  lamination->add_option("--to", to_text)->required();
  lamination->add_option("--depth", depth);
  lamination->add_option("--gap", gap);

  // envelope {sample, classify, report, continuity}
  auto* envelope = app.add_subcommand("envelope", "envelope sampling and analysis")->fallthrough();
  envelope->require_subcommand(1);
  EnvelopeArgs env_args;
  auto* env_sample = envelope->add_subcommand("sample", "membership grid")->fallthrough();
  env_args.add_common(env_sample, false);
  env_sample->add_option("--out", env_args.out_path, "grid CSV path");
  auto* env_classify = envelope->add_subcommand("classify", "boundary labels")->fallthrough();
  env_args.add_common(env_classify, true);
  env_classify->add_option("--out", env_args.out_path, "labeled grid CSV path");
  auto* env_report = envelope->add_subcommand("report", "shape report")->fallthrough();
  env_args.add_common(env_report, true);
  env_report->add_option("--width-tol", env_args.width_tol, "segment width tolerance in cells");
  auto* env_continuity = envelope->add_subcommand("continuity", "endpoint perturbation probe")->fallthrough();
  env_args.add_common(env_continuity, false);
  env_continuity->add_option("--deltas", env_args.deltas_text, "perturbation scales a,b,c");

  // track {check, flux, straighten, cut}
  auto* track = app.add_subcommand("track", "train-track operations")->fallthrough();
  track->require_subcommand(1);
  auto* track_check = track->add_subcommand("check", "validate track and switch conditions")->fallthrough();
  track_check->add_option("--track", track_path)->required();
  track_check->add_option("--weights", weights_path);
  auto* track_flux = track->add_subcommand("flux", "per-component flux of far weights")->fallthrough();
  track_flux->add_option("--track", track_path)->required();
  track_flux->add_option("--far", far_path)->required();
  auto* track_straighten = track->add_subcommand("straighten", "lift far weights to the track")->fallthrough();
  track_straighten->add_option("--track", track_path)->required();
  track_straighten->add_option("--far", far_path)->required();
  track_straighten->add_option("--out", out_path);
  auto* track_cut = track->add_subcommand("cut", "project a weight system to far data")->fallthrough();
  track_cut->add_option("--track", track_path)->required();
  track_cut->add_option("--weights", weights_path)->required();
  track_cut->add_option("--out", out_path);

  // torus {length, complete}
  auto* torus = app.add_subcommand("torus", "trace-coordinate model")->fallthrough();
  torus->require_subcommand(1);
  auto* torus_length = torus->add_subcommand("length", "geodesic length of a slope")->fallthrough();
  torus_length->add_option("--point", point_text)->required();
  torus_length->add_option("--slope", slope_text)->required();
  auto* torus_complete = torus->add_subcommand("complete", "complete (x,y) to a trace point")->fallthrough();
  torus_complete->add_option("--xy", xy_text)->required();
  torus_complete->add_option("--root", root_text);

  // boundary {L, criterion}
  auto* boundary = app.add_subcommand("boundary", "Thurston-boundary functionals")->fallthrough();
  boundary->require_subcommand(1);
  auto* boundary_l = boundary->add_subcommand("L", "tree Lipschitz constant")->fallthrough();
  boundary_l->add_option("--point", point_text)->required();
  boundary_l->add_option("--eta", eta_text)->required();
  boundary_l->add_option("--depth", depth);
  auto* boundary_crit = boundary->add_subcommand("criterion", "boundary accumulation criterion")->fallthrough();
  boundary_crit->add_option("--point", point_text)->required();
  boundary_crit->add_option("--eta", eta_text)->required();
  boundary_crit->add_option("--mu", mu_text)->required();
  boundary_crit->add_option("--depth", depth);
  boundary_crit->add_option("--gap", gap);

  // selftest
  auto* selftest = app.add_subcommand("selftest", "run the built-in property smoke suite")->fallthrough();
  selftest->add_option("--seed", seed);

  std::vector<const char*> argv;
  argv.push_back("thurston");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitInput;
  }

  std::string command;
  json data;
  int exit_code = kExitOk;
  std::string fail_reason;
  try {
    if (*dist) {
      command = "dist";
      DistanceEstimate est = thurston_distance(parse_point(from_text), parse_point(to_text),
                                               depth, tol, gap);
      json cluster = json::array();
      for (const Slope& s : est.argmax_cluster) cluster.push_back(s.str());
      data = {{"value", est.value},
              {"depth", est.depth},
              {"argmax", est.argmax.str()},
              {"converged", est.converged},
              {"argmax_cluster", cluster}};
      if (!json_out) {
        out << fmt(est.value) << "\n";
        out << "argmax " << est.argmax.str() << (est.converged ? " (converged)" : " (not converged)")
            << "\n";
      }
    } else if (*profile) {
      command = "profile";
      TracePoint x = parse_point(from_text), y = parse_point(to_text);
      RatioProfile prof = ratio_profile(x, y, depth);
      std::vector<double> lx = slope_lengths(x, prof.slopes);
      std::vector<double> ly = slope_lengths(y, prof.slopes);
      std::string csv = "p,q,length_src,length_dst,ratio\n";
      for (std::size_t i = 0; i < prof.slopes.size(); ++i) {
        csv += std::to_string(prof.slopes[i].p) + "," + std::to_string(prof.slopes[i].q) + "," +
               fmt(lx[i]) + "," + fmt(ly[i]) + "," + fmt(prof.ratios[i]) + "\n";
      }
      if (out_path.empty()) {
        out << csv;
      } else {
        write_file(out_path, csv);
      }
      data = {{"slopes", prof.slopes.size()}, {"depth", depth}, {"out", out_path}};
      if (!json_out && !out_path.empty()) out << "wrote " << out_path << "\n";
    } else if (*lamination) {
      command = "lamination";
      LaminationEstimate lam =
          stretch_lamination(parse_point(from_text), parse_point(to_text), depth, gap);
      if (lam.kind == LaminationEstimate::Kind::kRational) {
        data = {{"kind", "rational"}, {"slope", lam.slope.str()}, {"gap", lam.gap}};
        if (!json_out) out << "rational " << lam.slope.str() << " gap " << fmt(lam.gap) << "\n";
      } else {
        json conv = json::array();
        for (const Slope& s : lam.convergents) conv.push_back(s.str());
        data = {{"kind", "irrational"}, {"convergents", conv}, {"gap", lam.gap}};
        if (!json_out) {
          out << "irrational";
          for (const Slope& s : lam.convergents) out << " " << s.str();
          out << "\n";
        }
      }
    } else if (*env_sample || *env_classify || *env_report || *env_continuity) {
      TracePoint x = parse_point(env_args.x_text);
      TracePoint y = parse_point(env_args.y_text);
      Chart chart = env_args.chart();
      double use_gap = env_args.gap > 0.0 ? env_args.gap : cfg.classify_gap;
      if (*env_continuity) {
        command = "envelope continuity";
        auto deltas = parse_doubles(env_args.deltas_text, 0, "deltas");
        auto res = continuity_probe(x, y, chart, deltas, env_args.tol, env_args.depth,
                                    cfg.threads);
        json rows = json::array();
        for (const auto& r : res) {
          rows.push_back({{"delta", r.delta},
                          {"hausdorff_x", r.hausdorff_x},
                          {"hausdorff_y", r.hausdorff_y},
                          {"skipped_x", r.skipped_x},
                          {"skipped_y", r.skipped_y}});
          if (!json_out) {
            out << "delta " << fmt(r.delta) << " dH(X-perturbed) " << fmt(r.hausdorff_x)
                << " dH(Y-perturbed) " << fmt(r.hausdorff_y) << "\n";
          }
        }
        data = {{"results", rows}};
      } else {
        EnvelopeSample sample =
            sample_envelope(x, y, chart, env_args.tol, env_args.depth, cfg.threads);
        if (*env_sample) {
          command = "envelope sample";
          std::string csv = grid_csv(sample, nullptr);
          if (!env_args.out_path.empty()) write_file(env_args.out_path, csv);
          data = {{"members", sample.member_indices().size()},
                  {"tol", sample.tol},
                  {"dist_xy", sample.dist_xy},
                  {"out", env_args.out_path}};
          if (!json_out) {
            out << "members " << sample.member_indices().size() << " tol " << fmt(sample.tol)
                << " d(X,Y) " << fmt(sample.dist_xy) << "\n";
            if (env_args.out_path.empty()) out << csv;
          }
        } else {
          BoundaryClassification cls = classify_boundary(sample, env_args.depth, use_gap,
                                                         cfg.threads);
          if (*env_classify) {
            command = "envelope classify";
            std::string csv = grid_csv(sample, &cls);
            if (!env_args.out_path.empty()) write_file(env_args.out_path, csv);
            std::map<std::string, int> counts;
            for (BoundaryLabel l : cls.labels) counts[label_name(l)]++;
            data = json::object();
            for (const auto& [k, v] : counts) data[k] = v;
            data["out"] = env_args.out_path;
            if (!json_out) {
              for (const auto& [k, v] : counts) out << k << " " << v << "\n";
              if (env_args.out_path.empty()) out << csv;
            }
          } else {
            command = "envelope report";
            EnvelopeReport rep = shape_report(sample, cls, env_args.width_tol);
            data = report_to_json(rep);
            if (!json_out) {
              out << shape_name(rep.shape) << "\n";
              out << "bd_clusters " << rep.bd_cluster_count << " xy_opposite "
                  << (rep.xy_opposite ? "yes" : "no") << " width_cells "
                  << fmt(rep.max_width_cells) << " dim " << fmt(rep.dimension_estimate) << "\n";
            }
          }
        }
      }
    } else if (*track_check) {
      command = "track check";
      DecoratedTrack d = decorated_track_from_json(load_json_file(track_path));
      bool balanced = true;
      if (!weights_path.empty()) {
        WeightSystem w = weight_system_from_json(load_json_file(weights_path));
        balanced = check_switch_conditions(d.track, w);
      }
      auto comps = decompose_components(d);
      json comp_json = json::array();
      for (const auto& c : comps) {
        comp_json.push_back({{"id", c.id},
                             {"orientable", c.orientable},
                             {"branches", c.branches}});
      }
      data = {{"valid", true},
              {"switch_conditions", balanced},
              {"components", comp_json}};
      if (!json_out) {
        out << "track valid; " << comps.size() << " stump component(s)\n";
        if (!weights_path.empty()) {
          out << "switch conditions " << (balanced ? "hold" : "VIOLATED") << "\n";
        }
      }
      if (!balanced) {
        exit_code = kExitDomain;
        fail_reason = "switch conditions violated";
      }
    } else if (*track_flux) {
      command = "track flux";
      DecoratedTrack d = decorated_track_from_json(load_json_file(track_path));
      FarWeights f = far_weights_from_json(load_json_file(far_path));
      json rows = json::array();
      bool all_balanced = true;
      for (const auto& c : decompose_components(d)) {
        json row{{"component", c.id}, {"orientable", c.orientable}};
        if (c.orientable) {
          auto [in_sum, out_sum] = component_flux(d, c, f);
          row["in"] = in_sum.str();
          row["out"] = out_sum.str();
          row["balanced"] = in_sum == out_sum;
          all_balanced = all_balanced && in_sum == out_sum;
        }
        rows.push_back(row);
        if (!json_out) {
          out << "component " << c.id << (c.orientable ? " orientable" : " non-orientable");
          if (c.orientable) {
            out << " in " << rows.back()["in"].get<std::string>() << " out "
                << rows.back()["out"].get<std::string>();
          }
          out << "\n";
        }
      }
      data = {{"components", rows}, {"straightenable", all_balanced}};
      if (!json_out) out << (all_balanced ? "straightenable" : "NOT straightenable") << "\n";
    } else if (*track_straighten) {
      command = "track straighten";
      DecoratedTrack d = decorated_track_from_json(load_json_file(track_path));
      FarWeights f = far_weights_from_json(load_json_file(far_path));
      WeightSystem w = straighten_lift(d, f);
      json wj = weight_map_to_json(w.weights);
      if (!out_path.empty()) write_file(out_path, wj.dump(2) + "\n");
      data = {{"weights", wj}, {"out", out_path}};
      if (!json_out) out << wj.dump(2) << "\n";
    } else if (*track_cut) {
      command = "track cut";
      DecoratedTrack d = decorated_track_from_json(load_json_file(track_path));
      WeightSystem w = weight_system_from_json(load_json_file(weights_path));
      FarWeights f = cut(d, w);
      json fj = far_weights_to_json(f);
      if (!out_path.empty()) write_file(out_path, fj.dump(2) + "\n");
      data = {{"far", fj}, {"out", out_path}};
      if (!json_out) out << fj.dump(2) << "\n";
    } else if (*torus_length) {
      command = "torus length";
      TracePoint p = parse_point(point_text);
      Slope s = parse_slope(slope_text);
      double trace = trace_of_slope(p, s);
      double len = length_of_slope(p, s);
      data = {{"slope", s.str()}, {"trace", trace}, {"length", len}};
      if (!json_out) out << fmt(len) << "\n";
    } else if (*torus_complete) {
      command = "torus complete";
      auto v = parse_doubles(xy_text, 2, "xy");
      TracePoint p = markov_complete(v[0], v[1], parse_root(root_text));
      data = {{"x", p.x}, {"y", p.y}, {"z", p.z}};
      if (!json_out) out << fmt(p.x) << "," << fmt(p.y) << "," << fmt(p.z) << "\n";
    } else if (*boundary_l) {
      command = "boundary L";
      TracePoint p = parse_point(point_text);
      MeasuredSlope eta = parse_measured(eta_text);
      LipschitzEstimate est = tree_lipschitz_constant(p, eta, depth);
      data = {{"value", est.value},
              {"argmax", est.argmax.str()},
              {"depth", est.depth},
              {"stabilized", est.stabilized}};
      if (!json_out) {
        out << fmt(est.value) << "\n";
        out << "argmax " << est.argmax.str() << (est.stabilized ? " (stabilized)" : " (growing)")
            << "\n";
      }
    } else if (*boundary_crit) {
      command = "boundary criterion";
      TracePoint p = parse_point(point_text);
      AccumulationEvidence ev =
          accumulation_criterion(p, parse_measured(eta_text), parse_measured(mu_text), depth, gap);
      data = {{"holds", ev.holds},
              {"cluster_contained", ev.cluster_contained},
              {"finite", ev.finite},
              {"attained_on_cluster", ev.attained_on_cluster},
              {"max_ratio", ev.max_ratio},
              {"max_at", ev.max_at.str()},
              {"reason", ev.reason}};
      if (!json_out) out << (ev.holds ? "holds" : "fails") << ": " << ev.reason << "\n";
    } else if (*selftest) {
      command = "selftest";
      std::ostringstream report;
      bool ok = run_selftest(seed, report);
      data = {{"ok", ok}, {"report", report.str()}};
      if (!json_out) out << report.str();
      if (!ok) {
        exit_code = 1;
        fail_reason = "selftest failed";
      }
    }
  } catch (const InputError& e) {
    if (json_out) {
      out << json{{"command", command},
                  {"ok", false},
                  {"error", {{"type", "InputError"}, {"message", e.what()}}}}
                 .dump(2)
          << "\n";
    } else {
      err << "input error: " << e.what() << "\n";
    }
    return kExitInput;
  } catch (const FluxImbalance& e) {
    if (json_out) {
      out << json{{"command", command},
                  {"ok", false},
                  {"error",
                   {{"type", "FluxImbalance"},
                    {"message", e.what()},
                    {"component", e.component},
                    {"in", e.in_sum},
                    {"out", e.out_sum}}}}
                 .dump(2)
          << "\n";
    } else {
      err << "domain error: " << e.what() << "\n";
    }
    return kExitDomain;
  } catch (const DomainError& e) {
    if (json_out) {
      out << json{{"command", command},
                  {"ok", false},
                  {"error", {{"type", "DomainError"}, {"message", e.what()}}}}
                 .dump(2)
          << "\n";
    } else {
      err << "domain error: " << e.what() << "\n";
    }
    return kExitDomain;
  }

  if (json_out) {
    json summary{{"command", command}, {"ok", exit_code == kExitOk}, {"data", data}};
    if (exit_code != kExitOk) {
      summary["error"] = {{"type", "DomainError"}, {"message", fail_reason}};
    }
    out << summary.dump(2) << "\n";
  }
  return exit_code;
}

}  // namespace thurston::cli
