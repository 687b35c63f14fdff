// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "chunkflow/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

namespace chunkflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Vector vector_of(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

ConditionSet conditions_of(const json& j) {
  ConditionSet set;
  if (j.is_null()) return set;
  if (!j.is_object()) throw ConfigError("conditions must be an object");
  if (j.contains("global")) set.global = Condition{vector_of(j.at("global"), "conditions.global"), Condition::Role::Global};
  if (j.contains("per_chunk")) {
    for (const auto& c : j.at("per_chunk")) {
      set.per_chunk.push_back(Condition{vector_of(c, "conditions.per_chunk"), Condition::Role::PerChunk});
    }
  }
  return set;
}

SamplerConfig sampler_of(const json& j) {
  SamplerConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw ConfigError("sampler must be an object");
  cfg.steps = j.value("steps", cfg.steps);
  if (j.contains("time_grid")) cfg.time_grid = j.at("time_grid").get<std::vector<double>>();
  cfg.t_star = j.value("t_star", cfg.t_star);
  cfg.mode = parse_mode(j.value("mode", std::string("hybrid")));
  if (j.value("eta_schedule", std::string("binary")) != "binary") throw ConfigError("eta_schedule must be \"binary\"");
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.lambda_scale = j.value("lambda_scale", cfg.lambda_scale);
  return cfg;
}

json geometry_block(const ExperimentConfig& c) {
  json g = {{"F", c.geometry.F}, {"O", c.geometry.O}, {"S", c.geometry.S},
            {"K", c.geometry.K}, {"N", c.geometry.N}, {"r", c.r}};
  if (c.audio) {
    g["F_a"] = c.audio->window.F_a;
    g["O_a"] = c.audio->window.O_a;
    g["S_a"] = c.audio->window.S_a;
    g["rho_a"] = c.audio->rho_a;
    g["fps_v"] = c.audio->fps_v;
  }
  return g;
}

json sampler_block(const SamplerConfig& s) {
  return {{"steps", s.steps}, {"t_star", s.t_star}, {"mode", to_string(s.mode)},
          {"seed", s.seed},   {"lambda_scale", s.lambda_scale}};
}

std::string sample_file(const ExperimentConfig& c, const Arm& arm, const char* stem) {
  if (c.arms.size() == 1) return std::string(stem) + ".f64";
  return std::string(stem) + "_" + arm.label + ".f64";
}

}  // namespace

json load_config_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse '" + path.string() + "': " + e.what());
  }
  if (j.is_object() && j.contains("config") && j.contains("artifacts")) return j.at("config");
  return j;
}

json apply_overrides(json config, const ConfigOverrides& o) {
  if (!config.is_object()) throw ConfigError("config must be an object");
  if (o.seed) config["sampler"]["seed"] = *o.seed;
  if (o.mode) config["sampler"]["mode"] = *o.mode;
  if (o.t_star) config["sampler"]["t_star"] = *o.t_star;
  if (o.steps) {
    config["sampler"]["steps"] = *o.steps;
    config["sampler"].erase("time_grid");
  }
  if (o.chunks) config["geometry"]["K"] = *o.chunks;
  if (o.out) config["out"] = *o.out;
  return config;
}

ExperimentConfig parse_config(const json& config) {
  ExperimentConfig c;
  c.resolved = config;
  try {
    if (!config.is_object()) throw ConfigError("config must be an object");
    if (!config.contains("geometry")) throw ConfigError("config needs a geometry block");
    if (!config.contains("model")) throw ConfigError("config needs a model block");

    const json& geo = config.at("geometry");
    const int K = geo.value("K", 1);
    if (geo.contains("W")) {
      PixelWindowSpec spec{geo.at("W").get<int>(), geo.at("w").get<int>(), geo.value("r", 1)};
      c.pixel = spec;
      c.r = spec.r;
      c.geometry = ChunkGeometry::make(pixel_to_latent(spec), K);
    } else {
      c.r = geo.value("r", 1);
      c.geometry = ChunkGeometry::make(geo.at("F").get<int>(), geo.at("O").get<int>(), geo.at("S").get<int>(), K);
    }
    validate_geometry(c.geometry);

    c.sampler = sampler_of(config.value("sampler", json()));
    c.sampler.validate();
    c.model = config.at("model");
    (void)make_model(c.model, c.geometry.F);
    c.conditions = conditions_of(config.value("conditions", json()));
    c.conditions.validate(c.geometry.K);
    c.samples = config.value("metrics", json::object()).value("samples", 1);
    if (c.samples < 1) throw ConfigError("metrics.samples must be >= 1");
    c.out = config.value("out", std::string("out"));

    if (config.contains("audio")) {
      const json& a = config.at("audio");
      if (!c.pixel) throw ConfigError("audio needs a pixel-space geometry (W, w, r)");
      AudioSettings audio;
      audio.fps_v = a.at("fps_v").get<double>();
      audio.rho_a = a.at("rho_a").get<double>();
      audio.window = audio_geometry(c.pixel->W, c.pixel->w, audio.fps_v, audio.rho_a);
      audio.model = a.at("model");
      (void)make_model(audio.model, audio.window.F_a);
      audio.conditions = conditions_of(a.value("conditions", json()));
      audio.conditions.validate(K);
      validate_geometry(AudioGeometry::make(audio.window, K, audio.rho_a, audio.fps_v).chunks(K));
      c.audio = audio;
    }

    if (config.contains("sweep")) {
      const json& sw = config.at("sweep");
      std::vector<std::string> modes = sw.value("modes", std::vector<std::string>{to_string(c.sampler.mode)});
      std::vector<double> t_stars = sw.value("t_stars", std::vector<double>{c.sampler.t_star});
      const bool tag_t = sw.contains("t_stars");
      for (const auto& m : modes) {
        for (double ts : t_stars) {
          Arm arm{m, c.sampler};
          arm.sampler.mode = parse_mode(m);
          arm.sampler.t_star = ts;
          arm.sampler.validate();
          if (tag_t) arm.label += "_tstar" + format_number(ts);
          c.arms.push_back(arm);
        }
      }
      if (c.arms.empty()) throw ConfigError("sweep produces no arms");
    } else {
      c.arms.push_back(Arm{to_string(c.sampler.mode), c.sampler});
    }
  } catch (const GeometryError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentResult execute(const ExperimentConfig& c) {
  const auto model = make_model(c.model, c.geometry.F);
  std::unique_ptr<AnalyticModel> audio_model;
  ChunkGeometry audio_geom;
  if (c.audio) {
    audio_model = make_model(c.audio->model, c.audio->window.F_a);
    audio_geom = AudioGeometry::make(c.audio->window, c.geometry.K, c.audio->rho_a, c.audio->fps_v).chunks(c.geometry.K);
  }
  const bool parallel = c.resolved.value("sampler", json::object()).value("parallel", true);
  const Execution exec = parallel ? Execution::Parallel : Execution::Serial;

  ExperimentResult result;
  for (const Arm& arm : c.arms) {
    ArmResult ar;
    ar.arm = arm;
    std::vector<double> trace;
    if (c.audio) {
      trace.assign(arm.sampler.grid().size() - 1, 0.0);
      ar.audio_trace = trace;
      for (int i = 0; i < c.samples; ++i) {
        auto r = dual_stream_run(arm.sampler, *model, c.geometry, c.conditions, *audio_model, audio_geom,
                                 c.audio->conditions, static_cast<std::uint64_t>(i));
        for (std::size_t s = 0; s < trace.size(); ++s) {
          trace[s] += r.video_trace[s] / c.samples;
          ar.audio_trace[s] += r.audio_trace[s] / c.samples;
        }
        ar.samples.push_back(std::move(r.video.values));
        ar.audio_samples.push_back(std::move(r.audio.values));
      }
    } else {
      BatchResult batch = sample_batch(arm.sampler, *model, c.conditions, c.geometry, c.samples, exec);
      trace = std::move(batch.mean_overlap_trace);
      ar.samples = std::move(batch.samples);
    }

    MetricsReport& m = ar.metrics;
    m.mode = arm.label;
    m.seams = seam_discontinuity(ar.samples, c.geometry);
    m.overlap_trace = trace;
    if (!trace.empty()) {
      m.overlap_mse_first = trace.front();
      m.overlap_mse_final = trace.back();
    }
    if (c.samples >= 2) {
      m.marginal = chunk_marginal_error(ar.samples, c.geometry, *model, c.conditions);
      m.increment_variance = increment_variance(ar.samples);
    }
    if (const auto* gp = dynamic_cast<const GaussianProcessModel*>(model.get()); gp && c.samples >= 100) {
      m.gp_cross_seam_error = gp_cross_seam_error(ar.samples, c.geometry, gp->rho());
    }
    result.arms.push_back(std::move(ar));
  }

  json arms = json::array();
  for (const auto& ar : result.arms) {
    json a = {{"label", ar.arm.label}, {"sampler", sampler_block(ar.arm.sampler)},
              {"samples", sample_file(c, ar.arm, "samples")}};
    if (c.audio) a["audio_samples"] = sample_file(c, ar.arm, "audio_samples");
    arms.push_back(a);
  }
  json model_block = {{"backend", model->backend()}, {"digest", params_digest(*model)}, {"params", model->params()}};
  if (audio_model) {
    model_block["audio"] = {{"backend", audio_model->backend()},
                            {"digest", params_digest(*audio_model)},
                            {"params", audio_model->params()}};
  }
  result.manifest = {
      {"geometry", geometry_block(c)},
      {"sampler", sampler_block(c.sampler)},
      {"model", model_block},
      {"samples", c.samples},
      {"artifacts",
       {{"arms", arms}, {"metrics_csv", "metrics.csv"}, {"metrics_json", "metrics.json"}, {"trace_csv", "trace.csv"}}},
      {"config", c.resolved},
  };
  return result;
}

void write_samples(const fs::path& path, const std::vector<Frames>& samples, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  Eigen::Index rows = 0, cols = 0;
  for (const Frames& x : samples) {
    rows = x.rows();
    cols = x.cols();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      double v = x.data()[i];
      unsigned char bytes[8];
      std::memcpy(bytes, &v, 8);
      if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + 8);
      out.write(reinterpret_cast<const char*>(bytes), 8);
    }
  }
  json desc = {{"shape", {samples.size(), rows, cols}},
               {"dtype", "float64"},
               {"byte_order", "little"},
               {"layout", "row-major"},
               {"seed", seed}};
  fs::path desc_path = path;
  desc_path.replace_extension(".json");
  std::ofstream(desc_path) << desc.dump(2) << "\n";
}

std::vector<Frames> read_samples(const fs::path& path) {
  fs::path desc_path = path;
  desc_path.replace_extension(".json");
  std::ifstream din(desc_path);
  if (!din) throw std::runtime_error("missing descriptor '" + desc_path.string() + "'");
  const json desc = json::parse(din);
  const auto shape = desc.at("shape").get<std::vector<Eigen::Index>>();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::vector<Frames> out;
  for (Eigen::Index s = 0; s < shape.at(0); ++s) {
    Frames x(shape.at(1), shape.at(2));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      unsigned char bytes[8];
      in.read(reinterpret_cast<char*>(bytes), 8);
      if (!in) throw std::runtime_error("truncated sample file '" + path.string() + "'");
      if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + 8);
      std::memcpy(x.data() + i, bytes, 8);
    }
    out.push_back(std::move(x));
  }
  return out;
}

json run_experiment(const ExperimentConfig& c) {
  const std::string started = utc_now();
  ExperimentResult result = execute(c);
  const fs::path dir(c.out);
  fs::create_directories(dir);

  std::ofstream csv(dir / "metrics.csv");
  csv << MetricsReport::csv_header() << "\n";
  json metrics = json::array();
  std::ofstream trace(dir / "trace.csv");
  trace << "arm,stream,step,t,overlap_mse\n";
  for (const auto& ar : result.arms) {
    write_samples(dir / sample_file(c, ar.arm, "samples"), ar.samples, ar.arm.sampler.seed);
    if (c.audio) write_samples(dir / sample_file(c, ar.arm, "audio_samples"), ar.audio_samples, ar.arm.sampler.seed);
    csv << ar.metrics.csv_row() << "\n";
    metrics.push_back(ar.metrics.to_json());
    const auto grid = ar.arm.sampler.grid();
    auto emit = [&](const char* stream, const std::vector<double>& values) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        char buf[128];
        std::snprintf(buf, sizeof buf, ",%s,%zu,%.17g,%.17g\n", stream, i, grid[i], values[i]);
        trace << ar.arm.label << buf;
      }
    };
    emit("video", ar.metrics.overlap_trace);
    if (c.audio) emit("audio", ar.audio_trace);
  }
  std::ofstream(dir / "metrics.json") << json{{"arms", metrics}}.dump(2) << "\n";

  result.manifest["timestamps"] = {{"started", started}, {"finished", utc_now()}};
  std::ofstream(dir / "manifest.json") << result.manifest.dump(2) << "\n";
  return result.manifest;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

}  // namespace

void plot_metrics(const fs::path& input, const fs::path& output) {
  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot open '" + input.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file '" + input.string() + "'");
  const auto header = split_csv(line);
  auto column = [&](const char* name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error(std::string("no column '") + name + "' in " + input.string());
    return static_cast<std::size_t>(it - header.begin());
  };

  constexpr double W = 640, H = 400, L = 70, R = 20, T = 30, B = 50;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";

  const bool is_trace = std::find(header.begin(), header.end(), "step") != header.end();
  if (is_trace) {
    const std::size_t ca = column("arm"), cs = column("stream"), cstep = column("step"), cv = column("overlap_mse");
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    double max_x = 1, max_y = 0;
    while (std::getline(in, line)) {
      const auto row = split_csv(line);
      if (row.size() < header.size()) continue;
      const double x = std::stod(row[cstep]), y = std::stod(row[cv]);
      series[row[ca] + "/" + row[cs]].emplace_back(x, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
    if (max_y <= 0) max_y = 1;
    std::size_t idx = 0;
    for (const auto& [name, pts] : series) {
      const char* color = kPalette[idx % std::size(kPalette)];
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
      for (const auto& [x, y] : pts) {
        svg << L + x / max_x * (W - L - R) << "," << H - B - y / max_y * (H - T - B) << " ";
      }
      svg << "\"/>\n<text x=\"" << W - R - 150 << "\" y=\"" << T + 14 * (idx + 1) << "\" font-size=\"11\" fill=\""
          << color << "\">" << name << "</text>\n";
      ++idx;
    }
    svg << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" font-size=\"12\">step</text>\n"
        << "<text x=\"5\" y=\"" << T - 10 << "\" font-size=\"12\">overlap_mse (max " << max_y << ")</text>\n";
  } else {
    const std::size_t cm = column("mode"), cr = column("seam_ratio");
    std::vector<std::pair<std::string, double>> bars;
    double max_y = 0;
    while (std::getline(in, line)) {
      const auto row = split_csv(line);
      if (row.size() < header.size()) continue;
      bars.emplace_back(row[cm], std::stod(row[cr]));
      max_y = std::max(max_y, bars.back().second);
    }
    if (max_y <= 0) max_y = 1;
    const double slot = bars.empty() ? 1 : (W - L - R) / static_cast<double>(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
      const double h = bars[i].second / max_y * (H - T - B);
      const double x = L + i * slot + slot * 0.15;
      svg << "<rect x=\"" << x << "\" y=\"" << H - B - h << "\" width=\"" << slot * 0.7 << "\" height=\"" << h
          << "\" fill=\"" << kPalette[i % std::size(kPalette)] << "\"/>\n"
          << "<text x=\"" << x << "\" y=\"" << H - B + 16 << "\" font-size=\"11\">" << bars[i].first << "</text>\n"
          << "<text x=\"" << x << "\" y=\"" << H - B - h - 4 << "\" font-size=\"10\">" << bars[i].second
          << "</text>\n";
    }
    svg << "<text x=\"5\" y=\"" << T - 10 << "\" font-size=\"12\">seam discontinuity ratio</text>\n";
  }
  svg << "</svg>\n";
  std::ofstream out(output);
  if (!out) throw std::runtime_error("cannot write '" + output.string() + "'");
  out << svg.str();
}

}  // namespace chunkflow
