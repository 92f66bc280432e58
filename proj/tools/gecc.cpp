// Copyright 2026 The gecc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end: encode, decode, channel, stack-run, feedback-run,
// sweep, scenario, repair.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gecc/harness.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kAborted = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::string out;
  std::optional<std::string> format;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON configuration file");
  cmd->add_option("--seed", c.seed, "master seed (overrides config)");
  cmd->add_option("--trials", c.trials, "number of trials (overrides config)");
  cmd->add_option("--out", c.out, "directory for report files");
  cmd->add_option("--format", c.format, "stdout format")->check(CLI::IsMember({"csv", "json"}));
}

gecc::ScenarioConfig load(const Common& c) {
  gecc::ScenarioConfig config = c.config.empty() ? gecc::parse_config(gecc::json::object()) : gecc::load_config(c.config);
  if (c.seed) config.seed = *c.seed;
  if (c.trials) {
    if (*c.trials == 0) throw gecc::ConfigError("must be positive", "trials");
    config.trials = *c.trials;
  }
  if (!c.out.empty()) config.out = c.out;
  if (c.format) config.format = *c.format;
  return config;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw gecc::ConfigError("cannot write '" + path.string() + "'", "out");
  f << content;
}

gecc::Codebook load_codebook(const std::string& spec, std::optional<std::string> radius) {
  std::optional<gecc::Codebook::Radius> r;
  if (radius) {
    if (*radius == "unbounded") {
      r = gecc::Codebook::Radius{};
    } else {
      try {
        r = std::stod(*radius);
      } catch (const std::exception&) {
        throw gecc::ConfigError("expected a number or 'unbounded'", "radius");
      }
    }
  }
  auto with = [&](gecc::Codebook b) { return r ? b.with_radius(*r) : b; };
  if (spec == "hamming74") return with(gecc::hamming74_codebook());
  if (spec.rfind("repetition:", 0) == 0) {
    std::size_t k = 0;
    try {
      k = std::stoul(spec.substr(11));
    } catch (const std::exception&) {
      throw gecc::ConfigError("expected repetition:K", "codebook");
    }
    return with(gecc::repetition_codebook(k));
  }
  std::ifstream in(spec);
  if (!in) throw gecc::ConfigError("cannot read codebook file '" + spec + "'", "codebook");
  const std::string text{std::istreambuf_iterator<char>(in), {}};
  return r ? gecc::parse_codebook(text, *r) : gecc::parse_codebook(text);
}

std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(path);
  if (!in) throw gecc::ConfigError("cannot read '" + path + "'", "input");
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string row_summary_text(const gecc::SweepRow& r) {
  std::ostringstream s;
  s << "trials " << r.counts.trials << ", aborted " << r.counts.aborted << ", raw rate " << r.raw_rate()
    << ", residual rate " << r.residual_rate() << " +/- " << r.half_width() << ", overhead " << r.overhead_ratio()
    << ", net information per use " << r.net_information_per_use() << "\n";
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for generalized error-correcting channels"};
  app.require_subcommand(1);

  std::string codebook = "hamming74";
  std::optional<std::string> radius;

  auto* encode = app.add_subcommand("encode", "map symbols to codebook prototypes");
  std::vector<int> encode_symbols;
  encode->add_option("--codebook", codebook, "hamming74, repetition:K or a codebook file");
  encode->add_option("symbols", encode_symbols, "symbol ids")->required();

  auto* decode = app.add_subcommand("decode", "classify received vectors");
  std::vector<std::string> signals;
  bool table = false;
  std::vector<double> priors;
  double lambda = 0.0;
  decode->add_option("--codebook", codebook, "hamming74, repetition:K or a codebook file");
  decode->add_option("--radius", radius, "correction radius or 'unbounded'");
  decode->add_flag("--table", table, "print the distance to every prototype");
  decode->add_option("--priors", priors, "prior per prototype in codebook order (MAP decoding)");
  decode->add_option("--lambda", lambda, "prior weight for MAP decoding");
  decode->add_option("signals", signals, "vectors such as 0110001, 01?0001 or \"0.2 0.9 ?\"")->required();

  Common common;
  auto* channel = app.add_subcommand("channel", "pass a bit string through the configured error model");
  std::string bits;
  add_common(channel, common);
  channel->add_option("bits", bits, "bit string")->required();

  auto* stack_run = app.add_subcommand("stack-run", "Monte Carlo run of the configured stack");
  add_common(stack_run, common);

  auto* feedback_run = app.add_subcommand("feedback-run", "closed-loop feedback session");
  add_common(feedback_run, common);

  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep over the configured grid");
  add_common(sweep_cmd, common);

  auto* scenario = app.add_subcommand("scenario", "run a named preset");
  std::string scenario_name;
  add_common(scenario, common);
  scenario->add_option("name", scenario_name, "preset name")->required()->check(CLI::IsMember(gecc::scenario_names()));

  auto* repair = app.add_subcommand("repair", "minimum-edit repair of a tag stream");
  std::string repair_input;
  std::vector<std::string> alphabet;
  int max_edits = 8;
  repair->add_option("input", repair_input, "tag stream file, '-' for stdin")->required();
  repair->add_option("--alphabet", alphabet, "tag names allowed in insertions and substitutions")->required();
  repair->add_option("--max-edits", max_edits, "edit budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (*encode) {
      const gecc::Codebook book = load_codebook(codebook, std::nullopt);
      for (int s : encode_symbols) std::cout << book.encode(s).to_string() << "\n";
    } else if (*decode) {
      const gecc::Codebook book = load_codebook(codebook, radius);
      for (const auto& literal : signals) {
        const auto v = gecc::SignalVector::parse(literal);
        const auto outcome =
            priors.empty() ? gecc::nn_decode(book, v) : gecc::map_decode(book, v, priors, lambda);
        std::cout << literal << ": " << gecc::describe(outcome) << "\n";
        if (table)
          for (const auto& row : gecc::distance_table(book, v)) std::cout << "  " << row.symbol << " " << row.distance << "\n";
      }
    } else if (*channel) {
      const auto config = load(common);
      const auto model = gecc::parse_error_model(config.error_model);
      std::cout << gecc::apply(model, gecc::SignalFrame::from_bits(bits), gecc::TrialRng(config.seed)).to_string()
                << "\n";
    } else if (*stack_run) {
      const auto config = load(common);
      const gecc::SweepRow row = gecc::run_monte_carlo(config);
      const gecc::json summary = {{"config", gecc::to_json(config)}, {"result", gecc::to_json(row)}};
      write_file(config.out, "stack_run.csv", gecc::to_csv(std::vector<gecc::SweepRow>{row}));
      write_file(config.out, "stack_run_layers.csv", gecc::to_csv(row.counts.layers));
      write_file(config.out, "stack_run_summary.json", summary.dump(2) + "\n");
      std::cout << (config.format == "json" ? summary.dump(2) + "\n" : row_summary_text(row));
      // a single fixed transmission that aborted is a failed run
      if (config.trials == 1 && row.counts.aborted == 1) {
        std::cerr << "transmission aborted\n";
        return kAborted;
      }
    } else if (*feedback_run) {
      const auto config = load(common);
      const gecc::FeedbackRun run = gecc::run_feedback(config.feedback.is_null() ? gecc::json::object() : config.feedback);
      const gecc::json summary = {{"inverse", run.inverse},
                                  {"identified", run.identified},
                                  {"probes", run.probes},
                                  {"rounds", run.log.size()},
                                  {"forward_boxes", run.forward_boxes},
                                  {"forward_payload_bits", run.forward_payload_bits},
                                  {"final_plant", run.log.empty() ? 0.0 : run.log.back().plant}};
      write_file(config.out, "feedback_rounds.csv", gecc::to_csv(run.log));
      write_file(config.out, "feedback_summary.json", summary.dump(2) + "\n");
      std::cout << (config.format == "json" ? summary.dump(2) + "\n" : gecc::to_csv(run.log));
    } else if (*sweep_cmd) {
      const auto config = load(common);
      const auto rows = gecc::sweep(config);
      gecc::json results = gecc::json::array();
      for (const auto& r : rows) results.push_back(gecc::to_json(r));
      const gecc::json summary = {{"config", gecc::to_json(config)}, {"rows", results}};
      const std::string csv = gecc::to_csv(rows);
      write_file(config.out, "sweep.csv", csv);
      write_file(config.out, "sweep_summary.json", summary.dump(2) + "\n");
      std::cout << (config.format == "json" ? summary.dump(2) + "\n" : csv);
    } else if (*scenario) {
      const std::string out = common.out.empty() ? "." : common.out;
      const auto result = gecc::run_scenario(scenario_name, common.seed);
      for (const auto& [name, content] : result.files) write_file(out, name, content);
      std::cout << result.summary.dump(2) << "\n";
      if (!result.ok) return kAborted;
    } else if (*repair) {
      const auto stream = gecc::parse_tag_stream(read_input(repair_input));
      const auto result = gecc::repair_tags(stream, alphabet, max_edits);
      for (const auto& e : result.script)
        std::cerr << gecc::to_string(e.kind) << " at " << e.position << "\n";
      std::cout << gecc::format_tag_stream(result.repaired);
    }
  } catch (const gecc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const gecc::TransmissionAborted& e) {
    std::cerr << "transmission aborted: " << e.what() << "\n";
    return kAborted;
  } catch (const gecc::UnrepairableError& e) {
    std::cerr << "unrepairable: " << e.what() << "\n";
    return kAborted;
  }
  return 0;
}
