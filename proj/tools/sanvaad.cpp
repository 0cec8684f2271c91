// Command-line front end for the sanvaad library.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sanvaad/augment.hpp"
#include "sanvaad/content.hpp"
#include "sanvaad/dataset.hpp"
#include "sanvaad/error.hpp"
#include "sanvaad/eval.hpp"
#include "sanvaad/quantize.hpp"
#include "sanvaad/service.hpp"
#include "sanvaad/signplan.hpp"
#include "sanvaad/synthetic.hpp"
#include "sanvaad/train.hpp"

namespace {

using namespace sanvaad;
using nlohmann::json;

LabelNormalizer normalizer_from(const std::string& alias_path) {
  LabelNormalizer n;
  if (alias_path.empty()) return n;
  std::ifstream in(alias_path);
  if (!in) throw Error(ErrorCode::io, "cannot open alias table " + alias_path);
  try {
    for (const auto& [raw, symbol] : json::parse(in).items()) n.add_alias(raw, symbol.get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, alias_path + ": " + e.what());
  }
  return n;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << text;
}

struct ExtractArgs {
  std::string in, out, aliases;
  bool histogram = false;
};

void run_extract(const ExtractArgs& a) {
  const auto samples = load_dataset(a.in, normalizer_from(a.aliases));
  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + a.out);
  write_feature_dump(out, make_feature_dump(samples));
  std::cout << "wrote " << samples.size() << " feature rows to " << a.out << '\n';
  if (a.histogram) std::cout << format_histogram(class_histogram(samples));
}

struct AugmentArgs {
  std::string in, out, aliases;
  AugmentConfig cfg;
};

void run_augment(const AugmentArgs& a) {
  const auto samples = load_dataset(a.in, normalizer_from(a.aliases));
  const auto expanded = expand_dataset(samples, a.cfg);
  save_dataset(expanded, a.out);
  std::cout << samples.size() << " samples expanded to " << expanded.size() << " in " << a.out << '\n';
}

struct SynthArgs {
  std::string out;
  SyntheticSpec spec;
  bool one_hand = false;
};

void run_synth(SynthArgs a) {
  a.spec.two_hands = !a.one_hand;
  const auto data = make_blob_dataset(a.spec);
  save_dataset(data.samples, a.out);
  std::cout << "wrote " << data.samples.size() << " synthetic samples to " << a.out
            << " (min center distance " << data.min_center_distance << ")\n";
}

struct TrainArgs {
  std::string data, out, aliases, log_csv, test_out;
  TrainOptions options;
  bool no_augment = false;
  bool no_residual = false;
  bool quiet = false;
};

void run_train(TrainArgs a) {
  const auto samples = load_dataset(a.data, normalizer_from(a.aliases));
  a.options.augment_data = !a.no_augment;
  a.options.network.residual = !a.no_residual;
  if (!a.quiet) {
    a.options.on_epoch = [](const EpochStats& s) {
      std::cout << "epoch " << s.epoch << "  train_loss " << s.train_loss << "  train_acc " << s.train_acc
                << "  val_loss " << s.val_loss << "  val_acc " << s.val_acc << std::endl;
    };
  }
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result = train(samples, a.options);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  save_model(pack_model(result.model, Precision::f32), a.out);
  if (!a.log_csv.empty()) write_text(a.log_csv, epoch_log_csv(result.log));
  if (!a.test_out.empty()) save_dataset(result.split.test, a.test_out);
  const Score s = score(result.model, result.split.test);
  std::cout << "trained in " << secs << " s; held-out accuracy " << s.accuracy << " on " << result.split.test.size()
            << " samples; model written to " << a.out << '\n';
}

struct EvalArgs {
  std::string model, data, aliases, report, confusion, ablation_out;
  std::size_t top_confusions = 5;
  bool ablations = false;
  TrainOptions options;
};

void run_eval(EvalArgs a) {
  const auto samples = load_dataset(a.data, normalizer_from(a.aliases));
  if (a.ablations) {
    const AblationReport report = run_ablations(samples, a.options);
    std::cout << format_ablations(report);
    if (!a.ablation_out.empty()) write_text(a.ablation_out, ablations_to_json(report).dump(2) + "\n");
    return;
  }
  if (a.model.empty()) throw Error(ErrorCode::invalid_argument, "--model is required unless --ablations is given");
  const ResidualMlpModel model = load_model(a.model);
  const Evaluation ev = evaluate(model, samples);
  std::cout << format_report(ev.report);
  const auto pairs = top_confusions(ev.confusion, model.codec.classes(), a.top_confusions);
  if (!pairs.empty()) {
    std::cout << "\nmost frequent confusions (true -> predicted):\n";
    for (const auto& p : pairs) std::cout << "  " << p.truth << " -> " << p.predicted << ": " << p.count << '\n';
  }
  if (!a.report.empty()) write_text(a.report, report_to_json(ev.report).dump(2) + "\n");
  if (!a.confusion.empty()) write_text(a.confusion, confusion_to_csv(ev.confusion, model.codec.classes()));
}

void run_quantize(const std::string& in, const std::string& out) {
  const ResidualMlpModel model = load_model(in);
  const auto f32 = serialize_container(pack_model(model, Precision::f32));
  const auto i8 = serialize_container(quantize_model(model));
  write_text(out, i8);
  std::cout << "int8 container " << i8.size() << " bytes (" << 100.0 * static_cast<double>(i8.size()) / f32.size()
            << "% of f32 " << f32.size() << " bytes) written to " << out << '\n';
}

struct TranslateArgs {
  std::string text, dict;
  bool strict = false;
  bool as_json = false;
};

void run_translate(const TranslateArgs& a) {
  const PhraseDictionary dict = a.dict.empty() ? PhraseDictionary{} : load_dictionary(a.dict);
  const SignPlan plan = translate(TextPassthroughTranscriber{}.transcribe(a.text), dict, {a.strict});
  if (a.as_json) {
    std::cout << plan_to_json(plan).dump(2) << '\n';
    return;
  }
  for (const auto& item : plan.items) {
    if (const auto* g = std::get_if<GifItem>(&item)) {
      std::cout << "GIF    " << g->asset_id << "  (" << g->source_phrase << ")\n";
    } else {
      const auto& l = std::get<LetterItem>(item);
      std::cout << "LETTER " << l.symbol << "  " << l.duration << " s\n";
    }
  }
  for (const auto& w : plan.warnings) std::cout << "warning: " << w << '\n';
  if (plan.terminal) std::cout << "(stop keyword reached)\n";
}

struct ContentArgs {
  std::string lang = "english", topic, store_dir = "data";
  bool as_json = false;
};

void run_content(const ContentArgs& a) {
  const NewsLibrary library = NewsLibrary::load_directory(a.store_dir);
  const ContentBundle bundle = build_bundle(library, make_request(a.lang, a.topic));
  if (a.as_json) {
    std::cout << bundle_to_json(bundle).dump(2) << '\n';
    return;
  }
  std::cout << "language " << to_string(bundle.served_language) << (bundle.language_fallback ? " (fallback)" : "")
            << ", status " << to_string(bundle.status) << '\n';
  for (const auto& e : bundle.entries) {
    std::cout << "\n[" << format_iso_date(e.article.date) << "] " << e.article.title << '\n'
              << e.summary << '\n'
              << "speech: " << e.speech.segments.size() << " segments, " << e.speech.total_seconds() << " s\n";
  }
}

struct ServeArgs {
  std::string config, model, dict, store_dir, address;
  int port = -1;
};

void run_serve(const ServeArgs& a) {
  ServiceConfig cfg = a.config.empty() ? ServiceConfig{} : load_service_config(a.config);
  if (!a.model.empty()) cfg.model_path = a.model;
  if (!a.dict.empty()) cfg.dictionary_path = a.dict;
  if (!a.store_dir.empty()) cfg.store_dir = a.store_dir;
  if (!a.address.empty()) cfg.address = a.address;
  if (a.port >= 0) cfg.port = static_cast<std::uint16_t>(a.port);
  apply_env_overrides(cfg);
  Server server(ServiceState::load(cfg));
  const auto port = server.start();
  std::cout << "listening on " << cfg.address << ':' << port << std::endl;
  server.run_until_signal();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sign-language landmark classifier, sign planner and content pipeline"};
  app.require_subcommand(1);

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Compute 141-D feature rows from a landmark dataset");
  extract->add_option("--in", ex.in, "Landmark dataset (JSONL)")->required();
  extract->add_option("--out", ex.out, "Feature dump (SNVF)")->required();
  extract->add_option("--aliases", ex.aliases, "JSON object mapping folder names to labels");
  extract->add_flag("--histogram", ex.histogram, "Print per-class counts");

  AugmentArgs ag;
  auto* augment = app.add_subcommand("augment", "Expand a dataset 3x with noise and dropout variants");
  augment->add_option("--in", ag.in)->required();
  augment->add_option("--out", ag.out)->required();
  augment->add_option("--aliases", ag.aliases);
  augment->add_option("--seed", ag.cfg.seed);
  augment->add_option("--sigma", ag.cfg.noise_sigma, "Noise standard deviation");
  augment->add_option("--dropout-prob", ag.cfg.dropout_apply_prob, "On-the-fly dropout probability");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian-blob landmark dataset");
  synth->add_option("--out", sy.out)->required();
  synth->add_option("--per-class", sy.spec.per_class);
  synth->add_option("--sigma", sy.spec.sigma);
  synth->add_option("--separation", sy.spec.separation, "Minimum center distance in units of sigma");
  synth->add_option("--seed", sy.spec.seed);
  synth->add_flag("--one-hand", sy.one_hand);

  TrainArgs tr;
  auto* trainc = app.add_subcommand("train", "Train the residual MLP");
  trainc->add_option("--data", tr.data)->required();
  trainc->add_option("--out", tr.out, "Model container to write")->required();
  trainc->add_option("--aliases", tr.aliases);
  trainc->add_option("--epochs", tr.options.train.epochs);
  trainc->add_option("--batch-size", tr.options.train.batch_size);
  trainc->add_option("--lr", tr.options.train.learning_rate);
  trainc->add_option("--seed", tr.options.train.seed);
  trainc->add_option("--train-fraction", tr.options.train_fraction);
  trainc->add_flag("--no-augment", tr.no_augment, "Skip the offline 3x expansion");
  trainc->add_flag("--no-residual", tr.no_residual, "Drop the shortcut additions");
  trainc->add_flag("--on-the-fly", tr.options.on_the_fly, "Per-sample dropout inside batches");
  trainc->add_option("--log", tr.log_csv, "Per-epoch CSV log");
  trainc->add_option("--test-out", tr.test_out, "Write the held-out split as JSONL");
  trainc->add_flag("--quiet", tr.quiet);

  EvalArgs ev;
  auto* evalc = app.add_subcommand("eval", "Classification report, confusion matrix or ablations");
  evalc->add_option("--model", ev.model);
  evalc->add_option("--data", ev.data)->required();
  evalc->add_option("--aliases", ev.aliases);
  evalc->add_option("--report", ev.report, "JSON report output");
  evalc->add_option("--confusion", ev.confusion, "Confusion matrix CSV output");
  evalc->add_option("--top-confusions", ev.top_confusions);
  evalc->add_flag("--ablations", ev.ablations, "Train and compare full, no-augmentation and no-residual");
  evalc->add_option("--ablation-out", ev.ablation_out, "Ablation JSON output");
  evalc->add_option("--epochs", ev.options.train.epochs, "Epochs per ablation variant");
  evalc->add_option("--seed", ev.options.train.seed, "Seed shared by the ablation variants");

  std::string q_in, q_out;
  auto* quant = app.add_subcommand("quantize", "Write an int8 copy of a model");
  quant->add_option("--in", q_in)->required();
  quant->add_option("--out", q_out)->required();

  TranslateArgs ta;
  auto* trans = app.add_subcommand("translate", "Turn text into a sign plan");
  trans->add_option("text", ta.text)->required();
  trans->add_option("--dict", ta.dict, "Phrase manifest JSON");
  trans->add_flag("--strict", ta.strict, "Warn about characters with no sign");
  trans->add_flag("--json", ta.as_json);

  ContentArgs ca;
  auto* cont = app.add_subcommand("content", "Select, summarize and plan news for a topic");
  cont->add_option("--lang", ca.lang);
  cont->add_option("--topic", ca.topic)->required();
  cont->add_option("--store-dir", ca.store_dir);
  cont->add_flag("--json", ca.as_json);

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the HTTP and WebSocket service");
  serve->add_option("--config", sv.config, "Service config JSON");
  serve->add_option("--model", sv.model);
  serve->add_option("--dict", sv.dict);
  serve->add_option("--store-dir", sv.store_dir);
  serve->add_option("--address", sv.address);
  serve->add_option("--port", sv.port);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) run_extract(ex);
    else if (*augment) run_augment(ag);
    else if (*synth) run_synth(sy);
    else if (*trainc) run_train(tr);
    else if (*evalc) run_eval(ev);
    else if (*quant) run_quantize(q_in, q_out);
    else if (*trans) run_translate(ta);
    else if (*cont) run_content(ca);
    else if (*serve) run_serve(sv);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
