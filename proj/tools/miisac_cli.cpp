// miisac: CRB, penalty and Monte Carlo MLE sweeps for magneto-inductive
// range/conductivity sensing.
//
//   miisac crb     [--config f] [--out f] [--media list] [--format csv|json]
//   miisac penalty [--config f] [--out f] [--media list] [--trials n --seed s]
//   miisac mle     [--config f] [--out f] [--trials n] [--seed s] [--scale desk|full]
//   miisac figures fig2|fig3|fig4 [--scale desk|full] [--out dir] [--seed s]
//
// Exit codes: 0 ok, 1 config/I-O error, 2 singular FIM at every point,
// 3 Monte Carlo convergence rate below threshold.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "miisac/miisac.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericalFailure = 2, kConvergenceBreach = 3 };

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string media;
  std::string scale = "desk";
  std::string format = "csv";
  unsigned threads = 0;
  bool quiet = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw miisac::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::string text = read_file(path);
  // A previously emitted CSV carries its resolved config in the preamble.
  if (text.starts_with("#")) {
    text = miisac::config_from_csv(text);
    if (text.empty()) throw miisac::ConfigError("'" + path + "' has no '# config:' line");
  }
  return miisac::parse_config_text(text);
}

nlohmann::json parse_media_list(const std::string& list) {
  auto arr = nlohmann::json::array();
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    double v = 0.0;
    const auto* end = item.data() + item.size();
    const auto res = std::from_chars(item.data(), end, v);
    if (res.ec == std::errc{} && res.ptr == end) arr.push_back(v);
    else arr.push_back(item);
  }
  if (arr.empty()) throw miisac::ConfigError("--media: empty list");
  return arr;
}

miisac::SweepSpec build_spec(const std::string& command, const CommonOptions& o) {
  nlohmann::json doc = load_config(o.config_path);
  if (!o.media.empty()) {
    doc["media"] = parse_media_list(o.media);
    if (doc.contains("theta") && doc["theta"].is_object()) doc["theta"].erase("sigma_s_per_m");
  }
  const bool wants_mc = command == "mle" || o.trials || o.seed;
  if (wants_mc) {
    if (!doc.contains("mc")) doc["mc"] = nlohmann::json::object();
    if (doc["mc"].is_object()) {
      if (o.trials) doc["mc"]["trials"] = *o.trials;
      else if (!doc["mc"].contains("trials")) doc["mc"]["trials"] = miisac::scale_trials(o.scale == "full" ? miisac::Scale::full : miisac::Scale::desk);
      if (o.seed) doc["mc"]["seed"] = *o.seed;
    }
  }
  return miisac::parse_sweep_spec(doc, command);
}

miisac::OutputFormat output_format(const std::string& f) {
  return f == "json" ? miisac::OutputFormat::json : miisac::OutputFormat::csv;
}

miisac::RunOptions run_options(const CommonOptions& o) {
  miisac::RunOptions opt;
  opt.batch.threads = o.threads;
  if (!o.quiet) {
    opt.progress = [](std::size_t done, std::size_t total) {
      std::cerr << "\r[mc] point " << done << "/" << total << std::flush;
      if (done == total) std::cerr << '\n';
    };
  }
  return opt;
}

int finish(const miisac::SweepResult& res, const CommonOptions& o, const std::string& command,
           double threshold) {
  std::filesystem::path out = o.out_path.empty() ? command + (o.format == "json" ? ".json" : ".csv")
                                                 : o.out_path;
  miisac::write_result(res, out, output_format(o.format));
  if (!o.quiet) std::cerr << "wrote " << res.rows.size() << " rows to " << out.string() << '\n';
  if (!res.rows.empty() && res.singular_rows == static_cast<int>(res.rows.size())) {
    std::cerr << "error: Fisher information singular at every sweep point\n";
    return kNumericalFailure;
  }
  if (res.convergence_breaches > 0) {
    std::cerr << "warning: " << res.convergence_breaches
              << " point(s) below the convergence-rate threshold " << threshold << '\n';
    return kConvergenceBreach;
  }
  return kOk;
}

void add_common(CLI::App* sub, CommonOptions& o, bool mc) {
  sub->add_option("--config", o.config_path, "JSON config, or a CSV emitted by an earlier run");
  sub->add_option("--out", o.out_path, "output file");
  sub->add_option("--media", o.media, "comma-separated medium presets or conductivities (S/m)");
  sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_flag("--quiet", o.quiet, "suppress progress output");
  if (mc) {
    sub->add_option("--seed", o.seed, "Monte Carlo seed");
    sub->add_option("--trials", o.trials, "Monte Carlo trials per point")->check(CLI::PositiveNumber);
    sub->add_option("--scale", o.scale, "default trial count")->check(CLI::IsMember({"desk", "full"}));
    sub->add_option("--threads", o.threads, "worker threads (0: all cores)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cramer-Rao bounds and MLE validation for magneto-inductive range/conductivity sensing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", miisac::kToolVersion);

  CommonOptions crb_o, pen_o, mle_o, fig_o;
  auto* crb = app.add_subcommand("crb", "joint and single-parameter CRB sweep");
  add_common(crb, crb_o, false);
  auto* pen = app.add_subcommand("penalty", "joint-estimation penalty sweep");
  add_common(pen, pen_o, true);
  auto* mle = app.add_subcommand("mle", "Monte Carlo MLE against the CRB");
  add_common(mle, mle_o, true);

  auto* fig = app.add_subcommand("figures", "canonical sweep files for one figure");
  std::string which;
  fig->add_option("which", which, "fig2, fig3 or fig4")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "fig4"}));
  fig->add_option("--scale", fig_o.scale, "desk (1000 trials) or full (5000 trials)")
      ->check(CLI::IsMember({"desk", "full"}));
  fig->add_option("--out", fig_o.out_path, "output directory");
  fig->add_option("--seed", fig_o.seed, "Monte Carlo seed");
  fig->add_option("--format", fig_o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  fig->add_option("--threads", fig_o.threads, "worker threads (0: all cores)");
  fig->add_flag("--quiet", fig_o.quiet, "suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*crb) {
      const auto spec = build_spec("crb", crb_o);
      return finish(miisac::cmd_crb(spec), crb_o, "crb", spec.convergence_threshold);
    }
    if (*pen) {
      const auto spec = build_spec("penalty", pen_o);
      return finish(miisac::cmd_penalty(spec, run_options(pen_o)), pen_o, "penalty",
                    spec.convergence_threshold);
    }
    if (*mle) {
      const auto spec = build_spec("mle", mle_o);
      return finish(miisac::cmd_mle(spec, run_options(mle_o)), mle_o, "mle",
                    spec.convergence_threshold);
    }
    if (*fig) {
      const auto f = which == "fig2" ? miisac::Figure::fig2
                     : which == "fig3" ? miisac::Figure::fig3
                                       : miisac::Figure::fig4;
      const auto scale = fig_o.scale == "full" ? miisac::Scale::full : miisac::Scale::desk;
      const std::filesystem::path dir = fig_o.out_path.empty() ? "figures" : fig_o.out_path;
      const auto outputs = miisac::cmd_figures(f, scale, fig_o.seed.value_or(1), run_options(fig_o));
      int breaches = 0;
      for (const auto& o : outputs) {
        auto path = dir / o.filename;
        if (fig_o.format == "json") path.replace_extension(".json");
        miisac::write_result(o.result, path, output_format(fig_o.format));
        breaches += o.result.convergence_breaches;
        if (!fig_o.quiet) std::cerr << "wrote " << path.string() << '\n';
        if (o.result.convergence_breaches > 0)
          std::cerr << "warning: " << path.string() << ": " << o.result.convergence_breaches
                    << " point(s) below the convergence-rate threshold\n";
      }
      if (which == "fig4") {
        for (const auto& o : outputs) {
          if (!o.filename.starts_with("fig4_crb")) continue;
          const auto cm = miisac::pilots_for_accuracy(o.result, 0.01);
          std::cout << o.filename << ": "
                    << (cm ? "sqrt(CRB_r) <= 1 cm from L = " + std::to_string(*cm)
                           : std::string("sqrt(CRB_r) above 1 cm over the whole grid"))
                    << '\n';
        }
      }
      return breaches > 0 ? kConvergenceBreach : kOk;
    }
  } catch (const miisac::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const miisac::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
