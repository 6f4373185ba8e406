// titlegen: question-title-generation pipeline driver.
//
// Subcommands cover the full experiment loop: ingest -> stats/filter ->
// split -> build-vocab -> train -> generate -> evaluate -> report, plus the
// TF-IDF/oracle baselines and a gradient self-check. Every stage writes its
// artifacts into the configured workdir and records content hashes in
// manifest.json so a report can be traced back to its inputs.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "titlegen/baselines.hpp"
#include "titlegen/checkpoint.hpp"
#include "titlegen/config.hpp"
#include "titlegen/corpus.hpp"
#include "titlegen/decode.hpp"
#include "titlegen/errors.hpp"
#include "titlegen/io.hpp"
#include "titlegen/metrics.hpp"
#include "titlegen/model.hpp"
#include "titlegen/tokenizer.hpp"
#include "titlegen/trainer.hpp"
#include "titlegen/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace titlegen;

namespace {

std::string workpath(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.workdir) / name).string();
}

void update_manifest(const RunConfig& cfg, const std::string& stage,
                     const std::map<std::string, std::string>& inputs,
                     const std::map<std::string, std::string>& outputs) {
  std::string path = workpath(cfg, "manifest.json");
  json manifest = json::object();
  if (fs::exists(path)) {
    manifest = json::parse(read_file(path), nullptr, false);
    if (manifest.is_discarded()) manifest = json::object();
  }
  json entry;
  entry["config_hash"] = hash_hex(cfg.content_hash());
  entry["seed"] = cfg.seed;
  entry["inputs"] = inputs;
  entry["outputs"] = outputs;
  manifest[stage] = entry;
  write_file(path, manifest.dump(2) + "\n");
}

std::map<std::string, std::string> hash_files(const std::vector<std::string>& paths) {
  std::map<std::string, std::string> out;
  for (const auto& p : paths) {
    out[fs::path(p).filename().string()] = hash_hex(file_hash(p));
  }
  return out;
}

std::string post_language(const QuestionPost& post, const FilterConfig& filter) {
  for (const auto& tag : post.tags) {
    if (filter.allowed_tags.count(tag)) return tag;
  }
  return "other";
}

std::vector<std::string> source_tokens_for(const QuestionPost& post,
                                           const FilterConfig& filter) {
  SegmentedBody body = parse_body(post.body_markup);
  return filter.code_only ? body.code_tokens() : body.all_tokens();
}

// --- subcommands ---

int cmd_ingest(const RunConfig& cfg, const std::string& xml_path,
               std::string output) {
  if (output.empty()) output = cfg.corpus_path;
  if (output.empty()) throw ConfigError("ingest: no output path configured");
  std::vector<QuestionPost> posts = import_se_xml_file(xml_path);
  std::sort(posts.begin(), posts.end(),
            [](const QuestionPost& a, const QuestionPost& b) { return a.id < b.id; });
  write_posts_jsonl(output, posts);
  update_manifest(cfg, "ingest", hash_files({xml_path}), hash_files({output}));
  std::cout << "ingested " << posts.size() << " questions -> " << output << "\n";
  return 0;
}

int cmd_stats(const RunConfig& cfg, std::string input) {
  if (input.empty()) input = cfg.corpus_path;
  std::vector<QuestionPost> posts = read_posts_jsonl(input);
  StatsReport report = corpus_stats(posts);
  std::string json_path = workpath(cfg, "stats.json");
  std::string table = stats_to_table(report);
  write_file(json_path, stats_to_json(report) + "\n");
  write_file(workpath(cfg, "stats.txt"), table);
  update_manifest(cfg, "stats", hash_files({input}),
                  hash_files({json_path, workpath(cfg, "stats.txt")}));
  std::cout << table;
  return 0;
}

int cmd_filter(const RunConfig& cfg) {
  std::vector<QuestionPost> posts = read_posts_jsonl(cfg.corpus_path);
  std::vector<QuestionPost> retained;
  std::map<std::string, size_t> rejections;
  for (const auto& post : posts) {
    FilterResult result = passes_quality_filter(post, cfg.filter);
    if (result.pass) {
      retained.push_back(post);
    } else {
      rejections[std::string(to_string(result.reason))] += 1;
    }
  }
  std::string out_path = workpath(cfg, "filtered.jsonl");
  write_posts_jsonl(out_path, retained);

  json report;
  report["input_posts"] = posts.size();
  report["retained"] = retained.size();
  report["rejections"] = rejections;
  std::string report_path = workpath(cfg, "filter_report.json");
  write_file(report_path, report.dump(2) + "\n");

  update_manifest(cfg, "filter", hash_files({cfg.corpus_path}),
                  hash_files({out_path, report_path}));
  std::cout << "retained " << retained.size() << "/" << posts.size() << "\n";
  for (const auto& [reason, count] : rejections) {
    std::cout << "  rejected(" << reason << "): " << count << "\n";
  }
  return 0;
}

int cmd_split(const RunConfig& cfg) {
  std::vector<QuestionPost> posts = read_posts_jsonl(workpath(cfg, "filtered.jsonl"));
  DatasetSplit split = split_chronological(posts, cfg.split.validation_count,
                                           cfg.split.test_count);

  std::map<int64_t, const QuestionPost*> by_id;
  for (const auto& p : posts) by_id[p.id] = &p;
  auto select = [&](const std::vector<int64_t>& ids) {
    std::vector<QuestionPost> out;
    out.reserve(ids.size());
    for (int64_t id : ids) out.push_back(*by_id.at(id));
    return out;
  };

  std::vector<QuestionPost> train = select(split.train);
  // RQ3 fraction: seeded shuffle then prefix-take so Data/2 contains Data/4
  // contains Data/8 for a fixed seed. Validation/test stay untouched.
  if (cfg.fraction > 1) {
    std::vector<size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(train.size() / static_cast<size_t>(cfg.fraction));
    std::sort(order.begin(), order.end());
    std::vector<QuestionPost> sampled;
    sampled.reserve(order.size());
    for (size_t i : order) sampled.push_back(train[i]);
    train = std::move(sampled);
  }

  std::string train_path = workpath(cfg, "train.jsonl");
  std::string val_path = workpath(cfg, "validation.jsonl");
  std::string test_path = workpath(cfg, "test.jsonl");
  write_posts_jsonl(train_path, train);
  write_posts_jsonl(val_path, select(split.validation));
  write_posts_jsonl(test_path, select(split.test));

  json info;
  info["train"] = train.size();
  info["validation"] = split.validation.size();
  info["test"] = split.test.size();
  info["fraction"] = cfg.fraction;
  if (split.train_end_epoch_s) {
    info["train_end_date"] = format_iso8601_utc(*split.train_end_epoch_s);
  }
  if (split.validation_end_epoch_s) {
    info["validation_end_date"] = format_iso8601_utc(*split.validation_end_epoch_s);
  }
  std::string info_path = workpath(cfg, "split.json");
  write_file(info_path, info.dump(2) + "\n");

  update_manifest(cfg, "split", hash_files({workpath(cfg, "filtered.jsonl")}),
                  hash_files({train_path, val_path, test_path, info_path}));
  std::cout << "split: train=" << train.size() << " validation="
            << split.validation.size() << " test=" << split.test.size() << "\n";
  return 0;
}

int cmd_build_vocab(const RunConfig& cfg) {
  std::vector<QuestionPost> train = read_posts_jsonl(workpath(cfg, "train.jsonl"));
  std::vector<std::vector<std::string>> streams;
  streams.reserve(train.size() * 2);
  for (const auto& post : train) {
    streams.push_back(source_tokens_for(post, cfg.filter));
    streams.push_back(tokenize(post.title));
  }
  Vocabulary vocab = Vocabulary::build(streams, cfg.vocab.max_size,
                                       cfg.vocab.min_count);
  std::string vocab_path = workpath(cfg, "vocab.txt");
  vocab.save(vocab_path);
  update_manifest(cfg, "build-vocab", hash_files({workpath(cfg, "train.jsonl")}),
                  hash_files({vocab_path}));
  std::cout << "vocabulary: " << vocab.size() << " tokens -> " << vocab_path << "\n";
  return 0;
}

std::vector<TrainingExample> make_examples(const std::vector<QuestionPost>& posts,
                                           const Vocabulary& vocab,
                                           const RunConfig& cfg) {
  std::vector<TrainingExample> examples;
  examples.reserve(posts.size());
  for (const auto& post : posts) {
    try {
      TrainingExample ex;
      ex.source = encode_source(parse_body(post.body_markup), vocab,
                                cfg.filter.code_only, cfg.model.max_source_len);
      ex.target = encode_target(post.title, vocab, cfg.model.max_target_len);
      examples.push_back(std::move(ex));
    } catch (const SequenceTooLong& e) {
      throw SequenceTooLong("post " + std::to_string(post.id) + ": " + e.what());
    }
  }
  return examples;
}

ModelConfig model_config_with_vocab(const RunConfig& cfg, const Vocabulary& vocab) {
  ModelConfig mc = cfg.model;
  mc.vocab_size = vocab.size();
  mc.seed = cfg.seed;
  return mc;
}

int cmd_train(const RunConfig& cfg) {
  if (cfg.filter.max_body_tokens + 2 > static_cast<size_t>(cfg.model.max_source_len)) {
    throw ConfigError("train: max_body_tokens + 2 exceeds model.max_source_len");
  }
  if (cfg.filter.max_title_tokens + 2 > static_cast<size_t>(cfg.model.max_target_len)) {
    throw ConfigError("train: max_title_tokens + 2 exceeds model.max_target_len");
  }
  Vocabulary vocab = Vocabulary::load(workpath(cfg, "vocab.txt"));
  std::vector<QuestionPost> train_posts =
      read_posts_jsonl(workpath(cfg, "train.jsonl"));
  std::vector<QuestionPost> val_posts =
      read_posts_jsonl(workpath(cfg, "validation.jsonl"));
  std::vector<TrainingExample> train = make_examples(train_posts, vocab, cfg);
  std::vector<TrainingExample> validation = make_examples(val_posts, vocab, cfg);

  TitleModel model(model_config_with_vocab(cfg, vocab));
  TrainOptions opts;
  opts.epochs = cfg.trainer.epochs;
  opts.batch_size = cfg.trainer.batch_size;
  opts.max_steps = cfg.trainer.max_steps;
  opts.shuffle_seed = cfg.seed;
  opts.adam.lr = cfg.trainer.lr;
  opts.adam.beta1 = cfg.trainer.beta1;
  opts.adam.beta2 = cfg.trainer.beta2;
  opts.adam.epsilon = cfg.trainer.epsilon;
  opts.adam.warmup_fraction = cfg.trainer.warmup_fraction;
  opts.adam.grad_clip = cfg.trainer.grad_clip;
  opts.adam.weight_decay = cfg.trainer.weight_decay;

  TrainResult result = train_model(model, train, validation, opts);

  std::string best_path = workpath(cfg, "checkpoint-best.bin");
  std::string last_path = workpath(cfg, "checkpoint-last.bin");
  save_checkpoint(best_path, result.best_parameters);
  save_checkpoint(last_path, snapshot_parameters(model.parameters()));

  std::string log_path = workpath(cfg, "train_log.csv");
  std::string csv = "step,lr,train_loss,val_loss\n";
  char buf[160];
  for (const auto& row : result.log) {
    if (row.val_loss) {
      std::snprintf(buf, sizeof(buf), "%lld,%.8g,%.8g,%.8g\n",
                    static_cast<long long>(row.step), row.lr, row.train_loss,
                    *row.val_loss);
    } else {
      std::snprintf(buf, sizeof(buf), "%lld,%.8g,%.8g,\n",
                    static_cast<long long>(row.step), row.lr, row.train_loss);
    }
    csv += buf;
  }
  write_file(log_path, csv);

  json sidecar;
  ModelConfig mc = model.config();
  sidecar["model"] = {{"vocab_size", mc.vocab_size},
                      {"d_model", mc.d_model},
                      {"n_heads", mc.n_heads},
                      {"n_encoder_layers", mc.n_encoder_layers},
                      {"n_decoder_layers", mc.n_decoder_layers},
                      {"feedforward_dim", mc.feedforward_dim},
                      {"dropout_prob", mc.dropout_prob},
                      {"max_source_len", mc.max_source_len},
                      {"max_target_len", mc.max_target_len},
                      {"copy_enabled", mc.copy_enabled},
                      {"label_smoothing", mc.label_smoothing},
                      {"seed", mc.seed}};
  sidecar["vocab_hash"] = hash_hex(vocab.content_hash());
  sidecar["checkpoint_best_hash"] = hash_hex(file_hash(best_path));
  sidecar["checkpoint_last_hash"] = hash_hex(file_hash(last_path));
  sidecar["best_step"] = result.best_step;
  sidecar["best_val_loss"] = result.best_val_loss;
  sidecar["final_train_loss"] = result.final_train_loss;
  std::string sidecar_path = workpath(cfg, "model.json");
  write_file(sidecar_path, sidecar.dump(2) + "\n");

  update_manifest(cfg, "train",
                  hash_files({workpath(cfg, "train.jsonl"),
                              workpath(cfg, "validation.jsonl"),
                              workpath(cfg, "vocab.txt")}),
                  hash_files({best_path, last_path, log_path, sidecar_path}));
  std::cout << "trained " << result.log.size() << " steps; final train loss "
            << result.final_train_loss << ", best val loss " << result.best_val_loss
            << "\n";
  return 0;
}

ModelConfig model_config_from_sidecar(const std::string& path) {
  json j = json::parse(read_file(path));
  const auto& m = j.at("model");
  ModelConfig mc;
  mc.vocab_size = m.at("vocab_size").get<int64_t>();
  mc.d_model = m.at("d_model").get<int64_t>();
  mc.n_heads = m.at("n_heads").get<int>();
  mc.n_encoder_layers = m.at("n_encoder_layers").get<int>();
  mc.n_decoder_layers = m.at("n_decoder_layers").get<int>();
  mc.feedforward_dim = m.at("feedforward_dim").get<int64_t>();
  mc.dropout_prob = m.at("dropout_prob").get<double>();
  mc.max_source_len = m.at("max_source_len").get<int64_t>();
  mc.max_target_len = m.at("max_target_len").get<int64_t>();
  mc.copy_enabled = m.at("copy_enabled").get<bool>();
  mc.label_smoothing = m.at("label_smoothing").get<double>();
  mc.seed = m.at("seed").get<uint64_t>();
  return mc;
}

std::vector<int64_t> standard_bans(bool copy_enabled) {
  std::vector<int64_t> banned = {Vocabulary::kPad, Vocabulary::kCls,
                                 Vocabulary::kSep, Vocabulary::kSos};
  // The copy path exists precisely to avoid UNK in generated titles.
  if (copy_enabled) banned.push_back(Vocabulary::kUnk);
  return banned;
}

int cmd_generate(const RunConfig& cfg, std::string input, bool greedy) {
  if (input.empty()) input = workpath(cfg, "test.jsonl");
  Vocabulary vocab = Vocabulary::load(workpath(cfg, "vocab.txt"));
  json sidecar = json::parse(read_file(workpath(cfg, "model.json")));
  if (sidecar.at("vocab_hash").get<std::string>() != hash_hex(vocab.content_hash())) {
    throw ConfigError("generate: vocabulary does not match the trained checkpoint");
  }
  ModelConfig mc = model_config_from_sidecar(workpath(cfg, "model.json"));
  TitleModel model(mc);
  auto entries = load_checkpoint(workpath(cfg, "checkpoint-best.bin"));
  load_parameters(entries, model.parameters());
  model.set_training(false);

  std::vector<QuestionPost> posts = read_posts_jsonl(input);
  DecodeOptions opts;
  opts.max_len = cfg.decode.max_len;
  opts.eos_id = Vocabulary::kEos;
  opts.banned_ids = standard_bans(mc.copy_enabled);
  opts.length_normalize = cfg.decode.length_normalize;

  std::vector<GenerationRecord> records;
  records.reserve(posts.size());
  for (const auto& post : posts) {
    TokenSequence source = encode_source(parse_body(post.body_markup), vocab,
                                         cfg.filter.code_only, mc.max_source_len);
    ModelScorer scorer(model, vocab, model.encode(source));
    Hypothesis best;
    if (greedy || cfg.decode.beam_size <= 1) {
      best = greedy_decode(scorer, opts);
    } else {
      auto hyps = beam_decode(scorer, cfg.decode.beam_size, opts);
      if (hyps.empty()) continue;
      best = hyps.front();
    }
    GenerationRecord rec;
    rec.post_id = post.id;
    rec.tokens = best.surface_tokens(Vocabulary::kEos);
    rec.generated_title = join(rec.tokens, " ");
    rec.log_prob = best.log_prob;
    for (size_t i = 0; i < rec.tokens.size(); ++i) {
      if (best.ext_ids[i] >= vocab.size()) {
        rec.copied_token_positions.push_back(static_cast<int64_t>(i));
      }
    }
    records.push_back(std::move(rec));
  }
  std::string out_path = workpath(cfg, "generated.jsonl");
  write_generations_jsonl(out_path, records);
  update_manifest(cfg, "generate",
                  hash_files({input, workpath(cfg, "checkpoint-best.bin")}),
                  hash_files({out_path}));
  std::cout << "generated " << records.size() << " titles -> " << out_path << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, std::string generated, std::string references,
                 const std::string& label) {
  if (generated.empty()) generated = workpath(cfg, "generated.jsonl");
  if (references.empty()) references = workpath(cfg, "test.jsonl");
  std::vector<GenerationRecord> records = read_generations_jsonl(generated);
  std::vector<QuestionPost> posts = read_posts_jsonl(references);
  std::map<int64_t, const QuestionPost*> by_id;
  for (const auto& p : posts) by_id[p.id] = &p;

  std::vector<TokenList> candidates, refs;
  std::vector<std::string> languages;
  for (const auto& rec : records) {
    auto it = by_id.find(rec.post_id);
    if (it == by_id.end()) {
      throw IoError("evaluate: post " + std::to_string(rec.post_id) +
                    " missing from references");
    }
    TokenList cand = rec.tokens;
    if (cfg.metrics.lowercase) {
      for (auto& t : cand) t = to_lower_ascii(t);
    }
    candidates.push_back(cand);
    refs.push_back(tokenize(it->second->title));
    languages.push_back(post_language(*it->second, cfg.filter));
  }
  RougeLOptions rouge_opts{.strict_printed_form = cfg.metrics.strict_rouge_l};
  MetricReport report = evaluate_corpus(candidates, refs, languages, rouge_opts);

  std::string out_path = workpath(cfg, "metrics-" + label + ".json");
  write_file(out_path, metric_report_to_json(report) + "\n");
  update_manifest(cfg, "evaluate-" + label, hash_files({generated, references}),
                  hash_files({out_path}));
  std::cout << metric_comparison_table({{label, report}});
  return 0;
}

int cmd_baseline_tfidf(const RunConfig& cfg) {
  std::vector<QuestionPost> train = read_posts_jsonl(workpath(cfg, "train.jsonl"));
  std::vector<QuestionPost> test = read_posts_jsonl(workpath(cfg, "test.jsonl"));

  std::vector<TfIdfIndex::Document> docs;
  docs.reserve(train.size());
  for (const auto& post : train) {
    docs.push_back({post.id, source_tokens_for(post, cfg.filter),
                    to_lower_ascii(post.title)});
  }
  TfIdfIndex index = TfIdfIndex::build(docs);
  std::string index_path = workpath(cfg, "tfidf-index.bin");
  index.save(index_path);

  std::vector<GenerationRecord> records;
  records.reserve(test.size());
  for (const auto& post : test) {
    auto retrieval = index.retrieve(source_tokens_for(post, cfg.filter));
    GenerationRecord rec;
    rec.post_id = post.id;
    rec.tokens = tokenize(retrieval.title);
    rec.generated_title = join(rec.tokens, " ");
    rec.log_prob = 0;
    records.push_back(std::move(rec));
  }
  std::string out_path = workpath(cfg, "generated-tfidf.jsonl");
  write_generations_jsonl(out_path, records);
  update_manifest(cfg, "baseline-tfidf",
                  hash_files({workpath(cfg, "train.jsonl"),
                              workpath(cfg, "test.jsonl")}),
                  hash_files({index_path, out_path}));
  std::cout << "tf-idf baseline: " << records.size() << " titles\n";
  return 0;
}

int cmd_baseline_oracle(const RunConfig& cfg) {
  std::vector<QuestionPost> test = read_posts_jsonl(workpath(cfg, "test.jsonl"));
  std::vector<GenerationRecord> records;
  records.reserve(test.size());
  for (const auto& post : test) {
    GenerationRecord rec;
    rec.post_id = post.id;
    rec.tokens = oracle_title(tokenize(post.title),
                              source_tokens_for(post, cfg.filter));
    rec.generated_title = join(rec.tokens, " ");
    rec.log_prob = 0;
    records.push_back(std::move(rec));
  }
  std::string out_path = workpath(cfg, "generated-oracle.jsonl");
  write_generations_jsonl(out_path, records);
  update_manifest(cfg, "baseline-oracle", hash_files({workpath(cfg, "test.jsonl")}),
                  hash_files({out_path}));
  std::cout << "oracle baseline: " << records.size() << " titles\n";
  return 0;
}

int cmd_gradcheck(const RunConfig& cfg) {
  // Toy model, dropout off, every parameter group checked on a small batch.
  Vocabulary vocab;
  std::vector<std::vector<std::string>> streams = {
      {"how", "to", "sort", "a", "list", "in", "java", "map", "stream",
       "collect", "x", "=", "1", ";", "error", "value"}};
  for (int i = 0; i < 3; ++i) streams.push_back(streams[0]);
  vocab = Vocabulary::build(streams, 64, 1);

  ModelConfig mc;
  mc.vocab_size = vocab.size();
  mc.d_model = 16;
  mc.n_heads = 2;
  mc.n_encoder_layers = 2;
  mc.n_decoder_layers = 2;
  mc.feedforward_dim = 32;
  mc.dropout_prob = 0.0;
  mc.max_source_len = 16;
  mc.max_target_len = 8;
  mc.copy_enabled = true;
  mc.seed = cfg.seed;
  TitleModel model(mc);

  TokenSequence source = encode_wrapped_source(
      {"how", "to", "sort", "qlist77", "x", "=", "1"}, vocab);
  TokenSequence target =
      encode_wrapped_target({"sort", "qlist77", "in", "java"}, vocab);

  auto forward = [&]() { return model.nll_loss(source, target); };
  GradCheckReport report =
      grad_check(forward, model.parameters(), 1e-5, 24, cfg.seed);

  for (const auto& entry : report.entries) {
    std::cout << (entry.max_rel_err < 1e-4 ? "ok   " : "FAIL ") << entry.name
              << "  max_rel_err=" << entry.max_rel_err << "  (checked "
              << entry.checked_elements << ")\n";
  }
  std::cout << "max relative error: " << report.max_rel_err << "\n";
  return report.passed(1e-4) ? 0 : 1;
}

int cmd_report(const RunConfig& cfg, const std::vector<std::string>& inputs) {
  std::vector<std::pair<std::string, MetricReport>> models;
  for (const auto& spec : inputs) {
    size_t eq = spec.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("report: inputs take the form label=path");
    }
    models.emplace_back(spec.substr(0, eq),
                        metric_report_from_json(read_file(spec.substr(eq + 1))));
  }
  std::string table = metric_comparison_table(models);
  write_file(workpath(cfg, "report.txt"), table);
  json combined;
  for (const auto& [label, report] : models) {
    combined[label] = json::parse(metric_report_to_json(report));
  }
  write_file(workpath(cfg, "report.json"), combined.dump(2) + "\n");
  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stack Overflow question title generation pipeline"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  std::string config_path;
  std::optional<uint64_t> seed_override;
  std::optional<int> fraction_override;
  bool code_only = false, no_interrogative = false, no_copy = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed_override, "override the configured seed");
  app.add_option("--fraction", fraction_override,
                 "train-set divisor: 1, 2, 4 or 8");
  app.add_flag("--code-only", code_only, "use code segments only as model input");
  app.add_flag("--no-interrogative-filter", no_interrogative,
               "drop the interrogative title constraint");
  app.add_flag("--no-copy", no_copy, "disable the copy layer");

  std::string xml_path, ingest_output;
  auto* ingest = app.add_subcommand("ingest", "convert a Posts.xml dump to JSON-lines");
  ingest->add_option("--xml", xml_path, "Posts.xml path")->required();
  ingest->add_option("--output", ingest_output, "output JSON-lines path");

  std::string stats_input;
  auto* stats = app.add_subcommand("stats", "corpus statistics");
  stats->add_option("--input", stats_input, "corpus path (default: configured)");

  auto* filter = app.add_subcommand("filter", "apply the quality filters");
  auto* split = app.add_subcommand("split", "chronological train/validation/test split");
  auto* vocab = app.add_subcommand("build-vocab", "build the vocabulary");
  auto* train = app.add_subcommand("train", "train the model");

  std::string gen_input;
  bool gen_greedy = false;
  auto* generate = app.add_subcommand("generate", "decode titles");
  generate->add_option("--input", gen_input, "posts to decode (default: test split)");
  generate->add_flag("--greedy", gen_greedy, "greedy decoding regardless of beam size");

  std::string eval_generated, eval_references, eval_label = "model";
  auto* evaluate = app.add_subcommand("evaluate", "score generated titles");
  evaluate->add_option("--generated", eval_generated, "generated JSON-lines");
  evaluate->add_option("--references", eval_references, "reference posts");
  evaluate->add_option("--label", eval_label, "label for the metrics artifact");

  auto* tfidf = app.add_subcommand("baseline-tfidf", "TF-IDF retrieval baseline");
  auto* oracle = app.add_subcommand("baseline-oracle", "extractive oracle baseline");
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference self check");

  std::vector<std::string> report_inputs;
  auto* report = app.add_subcommand("report", "combined comparison table");
  report->add_option("--in", report_inputs, "label=metrics.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::from_json_file(config_path);
    cfg.apply_env_overrides();
    if (seed_override) {
      cfg.seed = *seed_override;
      cfg.model.seed = *seed_override;
    }
    if (fraction_override) cfg.fraction = *fraction_override;
    if (code_only) cfg.filter.code_only = true;
    if (no_interrogative) cfg.filter.interrogative_constraint = false;
    if (no_copy) cfg.model.copy_enabled = false;
    cfg.validate();
    if (!cfg.workdir.empty()) fs::create_directories(cfg.workdir);

    if (*ingest) return cmd_ingest(cfg, xml_path, ingest_output);
    if (*stats) return cmd_stats(cfg, stats_input);
    if (*filter) return cmd_filter(cfg);
    if (*split) return cmd_split(cfg);
    if (*vocab) return cmd_build_vocab(cfg);
    if (*train) return cmd_train(cfg);
    if (*generate) return cmd_generate(cfg, gen_input, gen_greedy);
    if (*evaluate) return cmd_evaluate(cfg, eval_generated, eval_references, eval_label);
    if (*tfidf) return cmd_baseline_tfidf(cfg);
    if (*oracle) return cmd_baseline_oracle(cfg);
    if (*gradcheck) return cmd_gradcheck(cfg);
    if (*report) return cmd_report(cfg, report_inputs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
