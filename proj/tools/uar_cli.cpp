// uar: dataset generation, feature extraction, training and evaluation.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "uar/chirp.hpp"
#include "uar/errors.hpp"
#include "uar/harness.hpp"
#include "uar/manifest.hpp"
#include "uar/scene.hpp"
#include "uar/svm.hpp"

namespace {

using namespace uar;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<FeatureKind> parse_kinds(const std::string& s) {
  if (s == "all") return {std::begin(kAllFeatureKinds), std::end(kAllFeatureKinds)};
  std::vector<FeatureKind> out;
  for (const auto& name : split_list(s)) {
    const auto k = parse_feature_kind(name);
    if (!k) fail(ErrorKind::Usage, "unknown feature kind '" + name + "' (expected F_ref, F_renv, F_ir, F_ienv or all)");
    out.push_back(*k);
  }
  if (out.empty()) fail(ErrorKind::Usage, "no feature kinds given");
  return out;
}

ReportFormat format_flag(const std::string& s) {
  const auto f = parse_report_format(s);
  if (!f) fail(ErrorKind::Usage, "unknown report format '" + s + "' (expected text or csv)");
  return *f;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::trunc);
  if (!f || !(f << text)) fail(ErrorKind::Io, "cannot write " + path.string());
}

std::string safe_name(std::string s) {
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  return s;
}

struct Globals {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
};

SensingConfig sensing_from(const Globals& g) { return g.config.empty() ? SensingConfig{} : load_config(g.config); }

std::vector<std::size_t> selected(const DatasetManifest& m, const Selector& s) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < m.records.size(); ++i)
    if (s.matches(m.records[i])) idx.push_back(i);
  if (idx.empty()) fail(ErrorKind::Parameter, "selector " + s.describe() + " matches no records");
  return idx;
}

int run(int argc, char** argv) {
  CLI::App app{"Ultrasound active-sensing action recognition"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  Globals g;
  app.add_option("--config", g.config, "Sensing config (gen, extract, timing) or condition config (xval)");
  app.add_option("--seed", g.seed, "Top-level seed for every random choice");
  app.add_option("--out", g.out, "Output directory or file");

  auto* timing = app.add_subcommand("timing", "Check the chirp timing constraints");

  auto* gen = app.add_subcommand("gen", "Synthesize a labelled dataset");
  std::string rooms_arg = "Rc:4", snr_arg = "20", classes_arg = "all";
  std::size_t instances = 10, channels = 1;
  gen->add_option("--rooms", rooms_arg, "Comma list of ROOM:SUBJECTS, e.g. Ra:1,Rb:1,Rc:4");
  gen->add_option("--instances", instances, "Instances per class and subject");
  gen->add_option("--snr", snr_arg, "Echo SNR in dB, or 'none'");
  gen->add_option("--channels", channels, "1 or 2 microphones")->check(CLI::Range(1, 2));
  gen->add_option("--classes", classes_arg, "Comma list of class names or 'all'");

  std::string manifest_arg, kinds_arg = "all", kind_arg = "F_renv", model_arg, format_arg = "text";
  std::string sel_rooms, sel_subjects;
  double C = 1.0;
  std::size_t epochs = 50;

  auto* extract = app.add_subcommand("extract", "Write feature matrices for every record");
  extract->add_option("--manifest", manifest_arg, "Dataset manifest.jsonl")->required();
  extract->add_option("--kinds", kinds_arg, "Comma list of feature kinds or 'all'");

  auto* train = app.add_subcommand("train", "Train a linear SVM on selected records");
  train->add_option("--manifest", manifest_arg, "Dataset manifest.jsonl")->required();
  train->add_option("--kind", kind_arg, "Feature kind");
  train->add_option("--rooms", sel_rooms, "Comma list of rooms (default all)");
  train->add_option("--subjects", sel_subjects, "Comma list of subjects (default all)");
  train->add_option("--C", C, "Regularization constant");
  train->add_option("--epochs", epochs, "Training epochs");

  auto* eval = app.add_subcommand("eval", "Evaluate a trained model on selected records");
  eval->add_option("--manifest", manifest_arg, "Dataset manifest.jsonl")->required();
  eval->add_option("--model", model_arg, "Model file from 'train'")->required();
  eval->add_option("--rooms", sel_rooms, "Comma list of rooms (default all)");
  eval->add_option("--subjects", sel_subjects, "Comma list of subjects (default all)");
  eval->add_option("--format", format_arg, "text or csv");

  auto* xval = app.add_subcommand("xval", "Run every condition of a condition config for each feature kind");
  xval->add_option("--manifest", manifest_arg, "Dataset manifest.jsonl")->required();
  xval->add_option("--kinds", kinds_arg, "Comma list of feature kinds or 'all'");
  xval->add_option("--C", C, "Regularization constant");
  xval->add_option("--epochs", epochs, "Training epochs");
  xval->add_option("--format", format_arg, "text or csv");

  auto* report = app.add_subcommand("report", "Render delimited reports as text, csv or a summary table");
  std::vector<std::string> report_files;
  report->add_option("files", report_files, "Delimited report files")->required();
  report->add_option("--format", format_arg, "text, csv or summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (timing->parsed()) {
    const auto s = sensing_from(g);
    const auto rep = validate_timing(s.geometry, s.chirp);
    std::cout << format_timing_report(rep);
    return rep.pass() ? 0 : 2;
  }

  if (gen->parsed()) {
    if (g.out.empty()) fail(ErrorKind::Usage, "gen needs --out");
    DatasetSpec spec;
    spec.seed = g.seed;
    spec.sensing = sensing_from(g);
    spec.instances_per_class = instances;
    spec.sim = channels == 2 ? SimConfig::two_channel() : SimConfig{};
    if (snr_arg == "none") {
      spec.sim.snr_db.reset();
    } else {
      try {
        std::size_t used = 0;
        spec.sim.snr_db = std::stod(snr_arg, &used);
        if (used != snr_arg.size()) throw std::invalid_argument(snr_arg);
      } catch (const std::logic_error&) {
        fail(ErrorKind::Usage, "--snr expects a number or 'none'");
      }
    }
    spec.rooms.clear();
    for (const auto& item : split_list(rooms_arg)) {
      const auto colon = item.find(':');
      const auto room = parse_room(item.substr(0, colon));
      if (!room) fail(ErrorKind::Usage, "unknown room in '" + item + "' (expected Ra, Rb or Rc)");
      RoomPlan plan{*room, 1};
      if (colon != std::string::npos) {
        try {
          plan.subjects = std::stoul(item.substr(colon + 1));
        } catch (const std::logic_error&) {
          fail(ErrorKind::Usage, "bad subject count in '" + item + "'");
        }
      }
      spec.rooms.push_back(plan);
    }
    if (classes_arg != "all") {
      spec.classes.clear();
      for (const auto& name : split_list(classes_arg)) {
        const auto a = parse_action(name);
        if (!a) fail(ErrorKind::Usage, "unknown class '" + name + "'");
        spec.classes.push_back(*a);
      }
    }
    const auto m = generate_dataset(spec, g.out);
    std::cout << "wrote " << m.records.size() << " recordings to " << g.out << "\n";
    return 0;
  }

  if (extract->parsed()) {
    const auto kinds = parse_kinds(kinds_arg);
    const auto m = load_manifest(manifest_arg);
    const auto sensing = g.config.empty() ? load_dataset_sensing(m) : load_config(g.config);
    const std::filesystem::path out = g.out.empty() ? m.base_dir / "features" : std::filesystem::path(g.out);
    std::filesystem::create_directories(out);
    std::size_t written = 0;
    for (const auto& r : m.records) {
      auto feats = extract_all(load_recording(m, r, sensing), kinds);
      for (auto& f : feats) {
        f.label = r.label;
        const auto windows = split_windows(f);
        for (std::size_t w = 0; w < windows.size(); ++w) {
          std::string stem = r.id + "." + std::string(to_string(f.kind));
          if (windows.size() > 1) stem += ".w" + std::to_string(w);
          save_feature_matrix(windows[w], sensing.chirp.fs, out / stem);
          ++written;
        }
      }
    }
    std::cout << "wrote " << written << " feature matrices to " << out.string() << "\n";
    return 0;
  }

  const Selector sel{split_list(sel_rooms), split_list(sel_subjects)};

  if (train->parsed()) {
    const auto kind = parse_kinds(kind_arg);
    if (kind.size() != 1) fail(ErrorKind::Usage, "train takes exactly one --kind");
    const auto m = load_manifest(manifest_arg);
    RecordingFeatureCache cache(m, load_dataset_sensing(m));
    std::vector<FeatureMatrix> feats;
    std::vector<ActionClass> labels;
    for (const auto i : selected(m, sel))
      for (const auto& w : cache.get(m.records[i], kind[0])) {
        feats.push_back(w);
        labels.push_back(m.records[i].label);
      }
    SvmHyperparams hp{C, epochs, g.seed};
    const auto model = train_linear_svm(feats, labels, hp);
    const std::filesystem::path out = g.out.empty() ? "model.bin" : g.out;
    save_model(model, out);
    std::cout << "trained on " << feats.size() << " windows (" << to_string(kind[0]) << "), model written to "
              << out.string() << "\n";
    return 0;
  }

  if (eval->parsed()) {
    const auto fmt = format_flag(format_arg);
    const auto m = load_manifest(manifest_arg);
    const auto model = load_model(model_arg);
    if (!model.feature_kind) fail(ErrorKind::Parameter, "model does not record its feature kind");
    RecordingFeatureCache cache(m, load_dataset_sensing(m));
    EvalReport rep;
    rep.condition = {"eval", "model " + model_arg, sel.describe(), std::string(to_string(*model.feature_kind)),
                     "linear-svm"};
    std::vector<FeatureMatrix> feats;
    std::vector<ActionClass> labels;
    for (const auto i : selected(m, sel))
      for (const auto& w : cache.get(m.records[i], *model.feature_kind)) {
        feats.push_back(w);
        labels.push_back(m.records[i].label);
      }
    const auto pred = predict(model, feats);
    for (std::size_t i = 0; i < labels.size(); ++i)
      ++rep.confusion[static_cast<std::size_t>(to_index(labels[i]))][static_cast<std::size_t>(to_index(pred.labels[i]))];
    rep.accuracy = rep.confusion_accuracy();
    const auto text = emit_report(rep, fmt);
    if (!g.out.empty()) write_text(g.out, text);
    std::cout << text;
    return 0;
  }

  if (xval->parsed()) {
    if (g.config.empty()) fail(ErrorKind::Usage, "xval needs --config pointing at a condition config");
    const auto fmt = format_flag(format_arg);
    const auto kinds = parse_kinds(kinds_arg);
    const auto conditions = load_conditions(g.config);
    const auto m = load_manifest(manifest_arg);
    RecordingFeatureCache cache(m, load_dataset_sensing(m));
    const SvmHyperparams hp{C, epochs, g.seed};
    std::vector<EvalReport> reports;
    for (const auto kind : kinds) {
      cache.clear();
      for (const auto& c : conditions) {
        auto rep = run_condition(m, c, kind, cache.provider(kind), hp, g.seed);
        if (!g.out.empty())
          write_text(std::filesystem::path(g.out) / (safe_name(c.name) + "_" + std::string(to_string(kind)) + ".csv"),
                     emit_report(rep, ReportFormat::Delimited));
        if (fmt == ReportFormat::Delimited) std::cout << emit_report(rep, fmt) << "\n";
        std::cerr << c.name << " " << to_string(kind) << ": " << rep.accuracy << "\n";
        reports.push_back(std::move(rep));
      }
    }
    const auto summary = emit_summary(reports);
    if (!g.out.empty()) write_text(std::filesystem::path(g.out) / "summary.txt", summary);
    if (fmt == ReportFormat::Text) std::cout << summary;
    return 0;
  }

  if (report->parsed()) {
    const bool summary = format_arg == "summary";
    const auto fmt = summary ? ReportFormat::Text : format_flag(format_arg);
    std::vector<EvalReport> reports;
    for (const auto& file : report_files) {
      std::ifstream f(file);
      if (!f) fail(ErrorKind::Io, "cannot open " + file);
      std::stringstream ss;
      ss << f.rdbuf();
      reports.push_back(parse_delimited_report(ss.str()));
      reports.back().validate();
    }
    if (summary) {
      std::cout << emit_summary(reports);
    } else {
      for (const auto& r : reports) std::cout << emit_report(r, fmt) << "\n";
    }
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const uar::Error& e) {
    std::cerr << "uar: " << e.what() << "\n";
    return uar::exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "uar: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "uar: " << e.what() << "\n";
    return 1;
  }
}
