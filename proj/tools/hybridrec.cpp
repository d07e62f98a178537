// hybridrec command-line driver. One subcommand per pipeline stage;
// every run writes a provenance manifest beside its outputs.
//
// Exit codes: 0 ok, 1 data/module error (error name on stderr), 2 usage.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hybridrec/pipeline.hpp"
#include "hybridrec/run_manifest.hpp"

namespace fs = std::filesystem;
using namespace hybridrec;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::uint32_t workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value config file");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "seed override")
      ->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--workers", args.workers, "intra-stage parallelism");
}

KeyValueConfig load_config(const CommonArgs& args) {
  return args.config_path.empty() ? KeyValueConfig()
                                  : KeyValueConfig::from_file(args.config_path);
}

TextOptions text_options_from(const KeyValueConfig& kv) {
  TextOptions opts;
  opts.min_token_len = static_cast<std::size_t>(
      kv.get_int("min_token_len", opts.min_token_len));
  if (kv.has("stopwords"))
    opts.stopwords = load_stopwords(kv.get_string("stopwords"));
  auto bins = kv.get_double_list("price_bins");
  if (bins.size() == 2) {
    opts.price_low_max = bins[0];
    opts.price_mid_max = bins[1];
  } else if (!bins.empty()) {
    throw ConfigInvalid("price_bins expects two edges: low_max,mid_max");
  }
  return opts;
}

TrainConfig train_config_from(const KeyValueConfig& kv, const std::string& ns,
                              TrainConfig base) {
  base.mode = parse_mode(kv.get_string(ns + ".mode", to_string(base.mode)));
  base.objective = parse_objective(
      kv.get_string(ns + ".objective", to_string(base.objective)));
  base.dim = static_cast<std::uint32_t>(kv.get_int(ns + ".dim", base.dim));
  base.window =
      static_cast<std::uint32_t>(kv.get_int(ns + ".window", base.window));
  base.epochs =
      static_cast<std::uint32_t>(kv.get_int(ns + ".epochs", base.epochs));
  base.lr_start = kv.get_double(ns + ".lr_start", base.lr_start);
  base.lr_end = kv.get_double(ns + ".lr_end", base.lr_end);
  base.min_count = kv.get_u64(ns + ".min_count", base.min_count);
  base.negative =
      static_cast<std::uint32_t>(kv.get_int(ns + ".negative", base.negative));
  base.subsample = kv.get_double(ns + ".subsample", base.subsample);
  base.seed = kv.get_u64(ns + ".seed", base.seed);
  return base;
}

DataPaths data_paths_from(const KeyValueConfig& kv) {
  DataPaths paths;
  paths.interactions = kv.require("interactions");
  paths.app_meta = kv.require("app_meta");
  paths.user_meta = kv.require("user_meta");
  paths.labels = kv.get_string("labels");
  return paths;
}

void manifest_inputs(RunManifest& m, const DataPaths& p) {
  m.add_input(p.interactions);
  m.add_input(p.app_meta);
  m.add_input(p.user_meta);
  if (!p.labels.empty()) m.add_input(p.labels);
}

int cmd_gen_data(const CommonArgs& args) {
  RunManifest manifest("gen-data");
  KeyValueConfig kv = load_config(args);
  SynthConfig config = synth_config_from_kv(kv);
  if (args.seed_set) config.seed = args.seed;
  manifest.set_config(kv.values());
  manifest.set_seed(config.seed);

  SynthData data = synth_generate(config);
  SynthPaths paths = synth_write_files(data, args.out_dir);
  for (const auto& p : {paths.interactions, paths.app_meta, paths.user_meta,
                        paths.labels, paths.manifest})
    manifest.add_output(p);
  manifest.write((fs::path(args.out_dir) / "gen-data.manifest.json").string());
  std::cout << "wrote " << data.users.size() << " users, " << data.apps.size()
            << " apps to " << args.out_dir << "\n";
  return 0;
}

int cmd_build_corpus(const CommonArgs& args, const std::string& scheme_name,
                     const DataPaths& cli_paths, std::size_t min_apps) {
  RunManifest manifest("build-corpus");
  KeyValueConfig kv = load_config(args);
  DataPaths paths = cli_paths;
  if (!args.config_path.empty() && paths.interactions.empty())
    paths = data_paths_from(kv);
  if (paths.interactions.empty() || paths.app_meta.empty() ||
      paths.user_meta.empty())
    throw CLI::ValidationError(
        "build-corpus needs --interactions, --app-meta and --user-meta");
  const Scheme scheme = parse_scheme(scheme_name);
  manifest.set_option("scheme", scheme_name);
  manifest.set_option("min_apps", std::to_string(min_apps));
  manifest_inputs(manifest, paths);

  DataBundle bundle = load_bundle(paths, min_apps);
  TextOptions text_opts = text_options_from(kv);
  NormalizedCatalog norm(bundle.catalog, text_opts);
  DocCorpus corpus = build_corpus_for(scheme, bundle, norm);

  fs::create_directories(args.out_dir);
  const std::string corpus_path =
      (fs::path(args.out_dir) / (scheme_name + "_corpus.txt")).string();
  save_corpus(corpus, corpus_path);
  manifest.add_output(corpus_path);

  if (scheme != Scheme::descriptions) {
    DocCorpus items;
    items.scheme = scheme;
    for (const auto& [app, _] : bundle.catalog.apps()) {
      TokenDoc doc = build_item_doc(app, scheme, norm);
      if (!doc.tokens.empty()) items.push(std::move(doc));
    }
    const std::string items_path =
        (fs::path(args.out_dir) / (scheme_name + "_items.txt")).string();
    save_corpus(items, items_path);
    manifest.add_output(items_path);
  }
  manifest.write(
      (fs::path(args.out_dir) / "build-corpus.manifest.json").string());
  std::cout << "wrote " << corpus.docs.size() << " documents ("
            << corpus.total_tokens() << " tokens) to " << corpus_path << "\n";
  return 0;
}

int cmd_train_embed(const CommonArgs& args, const std::string& corpus_path,
                    const std::string& items_path,
                    const std::string& scheme_name) {
  RunManifest manifest("train-embed");
  KeyValueConfig kv = load_config(args);
  const Scheme scheme = parse_scheme(scheme_name);
  TrainConfig base;
  base.mode = scheme == Scheme::descriptions ? Mode::sg : Mode::dbow;
  TrainConfig config = train_config_from(kv, "embed", base);
  if (scheme == Scheme::cf) config.min_count = kv.get_u64("embed.min_count", 1);
  if (args.seed_set) config.seed = args.seed;
  config.workers = args.workers;
  manifest.set_config(kv.values());
  manifest.set_seed(config.seed);
  manifest.set_option("scheme", scheme_name);
  manifest.add_input(corpus_path);
  if (!items_path.empty()) manifest.add_input(items_path);

  DocCorpus corpus = load_corpus(corpus_path, scheme);
  EmbeddingModel model = train(corpus, config);

  fs::create_directories(args.out_dir);
  const std::string model_path =
      (fs::path(args.out_dir) / (scheme_name + "_model.bin")).string();
  save_model(model, model_path);
  manifest.add_output(model_path);

  VectorSpace space;
  for (std::size_t p = 0; p < model.doc_count(); ++p) {
    std::vector<double> vec(model.doc_vector(p).begin(),
                            model.doc_vector(p).end());
    if (!is_zero_vector(vec)) space.insert(model.doc_tags[p], std::move(vec));
  }
  if (scheme == Scheme::cf) {
    for (std::size_t i = 0; i < model.vocab_size(); ++i) {
      std::vector<double> vec(model.word_vector(i).begin(),
                              model.word_vector(i).end());
      if (!is_zero_vector(vec))
        space.insert(app_tag(model.vocab.token(i)), std::move(vec));
    }
  } else if (!items_path.empty()) {
    const std::uint32_t infer_epochs = static_cast<std::uint32_t>(
        kv.get_int("infer_epochs", 50));
    const double infer_lr = kv.get_double("infer_lr", 0.025);
    DocCorpus items = load_corpus(items_path, scheme);
    for (const auto& doc : items.docs) {
      try {
        auto v = infer_doc(model, doc, infer_epochs, infer_lr,
                           config.seed ^ fnv1a64_str(doc.tag));
        std::vector<double> vec(v.begin(), v.end());
        if (!is_zero_vector(vec)) space.insert(doc.tag, std::move(vec));
      } catch (const AllTokensOOV&) {
        warn("item " + doc.tag + " skipped: all tokens OOV");
      }
    }
  }
  const std::string vectors_path =
      (fs::path(args.out_dir) / (scheme_name + "_vectors.txt")).string();
  space.save(vectors_path);
  manifest.add_output(vectors_path);
  manifest.write(
      (fs::path(args.out_dir) / "train-embed.manifest.json").string());
  std::cout << "trained " << to_string(config.mode) << "/"
            << to_string(config.objective) << " model, |V|="
            << model.vocab_size() << ", |P|=" << model.doc_count()
            << "; vectors: " << space.size() << "\n";
  return 0;
}

int cmd_fit_baseline(const CommonArgs& args, const std::string& method,
                     const DataPaths& cli_paths, std::size_t min_apps) {
  RunManifest manifest("fit-baseline");
  KeyValueConfig kv = load_config(args);
  DataPaths paths = cli_paths;
  if (!args.config_path.empty() && paths.interactions.empty())
    paths = data_paths_from(kv);
  manifest.set_option("method", method);
  manifest_inputs(manifest, paths);

  DataBundle bundle = load_bundle(paths, min_apps);
  TextOptions text_opts = text_options_from(kv);
  NormalizedCatalog norm(bundle.catalog, text_opts);
  EmbedSettings settings;
  settings.word2vec = train_config_from(kv, "embed", settings.word2vec);
  if (args.seed_set) {
    settings.word2vec.seed = args.seed;
    settings.doc2vec.seed = args.seed;
  }

  auto vectors = build_representation(method, bundle, norm, settings);
  VectorSpace space;
  for (const auto& [user, vec] : vectors) {
    if (!is_zero_vector(vec)) {
      auto copy = vec;
      space.insert(user_tag(user), std::move(copy));
    }
  }
  fs::create_directories(args.out_dir);
  const std::string out_path =
      (fs::path(args.out_dir) / (method + "_users.txt")).string();
  space.save(out_path);
  manifest.add_output(out_path);
  manifest.write(
      (fs::path(args.out_dir) / "fit-baseline.manifest.json").string());
  std::cout << "wrote " << space.size() << " user vectors to " << out_path
            << "\n";
  return 0;
}

int cmd_recommend(const std::string& space_path, const std::string& query,
                  std::size_t k, const std::string& filter_name,
                  const std::string& out_path) {
  VectorSpace space = VectorSpace::load(space_path);
  auto results = top_k(space, query, k, parse_filter(filter_name));
  std::ostringstream body;
  char buf[32];
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f", results[i].similarity);
    body << (i + 1) << '\t' << results[i].tag << '\t' << buf << '\n';
  }
  std::cout << body.str();
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoFailure("cannot write " + out_path);
    out << body.str();
  }
  return 0;
}

SuiteOptions suite_options_from(const KeyValueConfig& kv) {
  SuiteOptions opts;
  for (const auto& name : kv.get_list("methods"))
    opts.methods.push_back(parse_method_spec(name));
  if (opts.methods.empty())
    throw ConfigInvalid("suite config needs a methods list");
  auto grid = kv.get_double_list("lambda_grid");
  if (!grid.empty()) opts.lambda_grid = grid;
  opts.k_folds = static_cast<std::uint32_t>(kv.get_int("k_folds", opts.k_folds));
  opts.test_fraction = kv.get_double("test_fraction", opts.test_fraction);
  opts.seed = kv.get_u64("split_seed", opts.seed);
  opts.logreg_max_iters = static_cast<std::uint32_t>(
      kv.get_int("logreg_max_iters", opts.logreg_max_iters));
  opts.logreg_tol = kv.get_double("logreg_tol", opts.logreg_tol);
  return opts;
}

int cmd_eval_suite(const CommonArgs& args) {
  if (args.config_path.empty())
    throw CLI::ValidationError("eval-suite needs --config");
  RunManifest manifest("eval-suite");
  KeyValueConfig kv = load_config(args);
  DataPaths paths = data_paths_from(kv);
  if (paths.labels.empty())
    throw CLI::ValidationError("eval-suite config needs labels = <path>");
  manifest.set_config(kv.values());
  manifest_inputs(manifest, paths);

  const std::size_t min_apps =
      static_cast<std::size_t>(kv.get_int("min_apps", 3));
  DataBundle bundle = load_bundle(paths, min_apps);
  TextOptions text_opts = text_options_from(kv);
  NormalizedCatalog norm(bundle.catalog, text_opts);

  EmbedSettings settings;
  settings.doc2vec = train_config_from(kv, "embed", settings.doc2vec);
  settings.word2vec = train_config_from(kv, "word2vec", settings.word2vec);
  settings.doc2vec.workers = args.workers;
  settings.word2vec.workers = args.workers;
  if (args.seed_set) {
    settings.doc2vec.seed = args.seed;
    settings.word2vec.seed = args.seed;
  }
  manifest.set_seed(settings.doc2vec.seed);

  SuiteOptions opts = suite_options_from(kv);
  std::set<std::string> needed;
  for (const auto& m : opts.methods)
    for (const auto& s : m.sources) needed.insert(s);

  RepresentationBank bank;
  for (const auto& name : needed) {
    if (kv.has("vectors." + name)) {
      // Precomputed user vectors in the shared text format.
      const std::string path = kv.get_string("vectors." + name);
      manifest.add_input(path);
      VectorSpace space = VectorSpace::load(path);
      std::map<UserId, std::vector<double>> vectors;
      for (const auto& [tag, vec] : space.vectors())
        if (tag_kind(tag) == TagKind::user) vectors[tag.substr(5)] = vec;
      bank[name] = std::move(vectors);
    } else {
      bank[name] = build_representation(name, bundle, norm, settings);
    }
  }

  ExperimentReport report =
      run_suite(bundle.labels, bundle.interactions, bundle.user_meta,
                bundle.catalog, bank, opts);

  fs::create_directories(args.out_dir);
  const std::string csv_path =
      (fs::path(args.out_dir) / "report.csv").string();
  const std::string json_path =
      (fs::path(args.out_dir) / "report.json").string();
  const std::string table_path =
      (fs::path(args.out_dir) / "report.txt").string();
  {
    std::ofstream out(csv_path, std::ios::binary);
    report.to_csv(out);
  }
  {
    std::ofstream out(json_path, std::ios::binary);
    out << report.to_json().dump(2) << "\n";
  }
  {
    std::ofstream out(table_path, std::ios::binary);
    report.to_table(out);
  }
  for (const auto& p : {csv_path, json_path, table_path})
    manifest.add_output(p);
  manifest.write(
      (fs::path(args.out_dir) / "eval-suite.manifest.json").string());
  report.to_table(std::cout);
  return 0;
}

int cmd_report(const std::string& in_path, const std::string& format) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + in_path);
  nlohmann::json j;
  in >> j;
  ExperimentReport report = ExperimentReport::from_json(j);
  if (format == "csv")
    report.to_csv(std::cout);
  else
    report.to_table(std::cout);
  return 0;
}

int cmd_pipeline(const CommonArgs& args) {
  if (args.config_path.empty())
    throw CLI::ValidationError("pipeline needs --config");
  KeyValueConfig kv = load_config(args);
  CommonArgs stage = args;

  if (kv.get_bool("synth", false)) {
    const std::string data_dir = (fs::path(args.out_dir) / "data").string();
    stage.out_dir = data_dir;
    cmd_gen_data(stage);
    KeyValueConfig suite_kv = kv;
    suite_kv.set("interactions",
                 (fs::path(data_dir) / "interactions.csv").string());
    suite_kv.set("app_meta", (fs::path(data_dir) / "app_meta.csv").string());
    suite_kv.set("user_meta", (fs::path(data_dir) / "user_meta.csv").string());
    suite_kv.set("labels", (fs::path(data_dir) / "labels.csv").string());
    const std::string suite_cfg =
        (fs::path(args.out_dir) / "suite.resolved.cfg").string();
    std::ofstream out(suite_cfg, std::ios::binary);
    for (const auto& [k, v] : suite_kv.values())
      out << k << " = " << v << "\n";
    out.close();
    stage.config_path = suite_cfg;
  }
  stage.out_dir = args.out_dir;
  return cmd_eval_suite(stage);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid-filtering user representations: synthetic data, "
               "corpora, embeddings, baselines, recommendations and "
               "look-alike evaluation"};
  app.require_subcommand(1);

  CommonArgs gen_args;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  add_common(gen, gen_args);

  CommonArgs corpus_args;
  std::string corpus_scheme = "user2vec";
  DataPaths corpus_paths;
  std::size_t corpus_min_apps = 3;
  auto* corpus = app.add_subcommand("build-corpus",
                                    "build token documents for a scheme");
  add_common(corpus, corpus_args);
  corpus->add_option("--scheme", corpus_scheme,
                     "cf|user2vec|context2vec|descriptions");
  corpus->add_option("--interactions", corpus_paths.interactions, "CSV path");
  corpus->add_option("--app-meta", corpus_paths.app_meta, "CSV path");
  corpus->add_option("--user-meta", corpus_paths.user_meta, "CSV path");
  corpus->add_option("--min-apps", corpus_min_apps, "min distinct apps");

  CommonArgs embed_args;
  std::string embed_corpus, embed_items, embed_scheme = "user2vec";
  auto* embed = app.add_subcommand("train-embed",
                                   "train an embedding model on a corpus");
  add_common(embed, embed_args);
  embed->add_option("--corpus", embed_corpus, "corpus file")->required();
  embed->add_option("--items", embed_items, "item docs for inference");
  embed->add_option("--scheme", embed_scheme,
                    "cf|user2vec|context2vec|descriptions");

  CommonArgs base_args;
  std::string base_method = "tfidf";
  DataPaths base_paths;
  std::size_t base_min_apps = 3;
  auto* base = app.add_subcommand("fit-baseline",
                                  "fit a classical baseline representation");
  add_common(base, base_args);
  base->add_option("--method", base_method, "tfidf|lsa|lda|w2v");
  base->add_option("--interactions", base_paths.interactions, "CSV path")
      ->required();
  base->add_option("--app-meta", base_paths.app_meta, "CSV path")->required();
  base->add_option("--user-meta", base_paths.user_meta, "CSV path")
      ->required();
  base->add_option("--min-apps", base_min_apps, "min distinct apps");

  std::string rec_space, rec_query, rec_filter = "all", rec_out;
  std::size_t rec_k = 10;
  auto* rec = app.add_subcommand("recommend",
                                 "top-k similar tags in a vector space");
  rec->add_option("--space", rec_space, "vector file")->required();
  rec->add_option("--query", rec_query, "query tag")->required();
  rec->add_option("--k", rec_k, "result count");
  rec->add_option("--filter", rec_filter, "apps|users|all");
  rec->add_option("--out", rec_out, "also write TSV here");

  CommonArgs suite_args;
  auto* suite = app.add_subcommand("eval-suite",
                                   "run the look-alike evaluation suite");
  add_common(suite, suite_args);

  std::string report_in, report_format = "table";
  auto* report = app.add_subcommand("report", "render a report.json");
  report->add_option("--in", report_in, "report.json path")->required();
  report->add_option("--format", report_format, "table|csv");

  CommonArgs pipe_args;
  auto* pipe = app.add_subcommand("pipeline",
                                  "chain gen-data and eval-suite from one "
                                  "config");
  add_common(pipe, pipe_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_args);
    if (corpus->parsed())
      return cmd_build_corpus(corpus_args, corpus_scheme, corpus_paths,
                              corpus_min_apps);
    if (embed->parsed())
      return cmd_train_embed(embed_args, embed_corpus, embed_items,
                             embed_scheme);
    if (base->parsed())
      return cmd_fit_baseline(base_args, base_method, base_paths,
                              base_min_apps);
    if (rec->parsed())
      return cmd_recommend(rec_space, rec_query, rec_k, rec_filter, rec_out);
    if (suite->parsed()) return cmd_eval_suite(suite_args);
    if (report->parsed()) return cmd_report(report_in, report_format);
    if (pipe->parsed()) return cmd_pipeline(pipe_args);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
