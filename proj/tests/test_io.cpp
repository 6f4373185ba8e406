#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "titlegen/config.hpp"
#include "titlegen/errors.hpp"
#include "titlegen/io.hpp"
#include "titlegen/util.hpp"

using namespace titlegen;
namespace fs = std::filesystem;

TEST_CASE("iso8601 parsing and formatting") {
  CHECK(parse_iso8601_utc("1970-01-01T00:00:00") == 0);
  CHECK(parse_iso8601_utc("1970-01-02T00:00:00Z") == 86400);
  CHECK(parse_iso8601_utc("2008-07-31T21:42:52.667") ==
        parse_iso8601_utc("2008-07-31T21:42:52"));
  CHECK(format_iso8601_utc(0) == "1970-01-01T00:00:00Z");
  int64_t t = parse_iso8601_utc("2020-06-15T07:08:09Z");
  CHECK(format_iso8601_utc(t) == "2020-06-15T07:08:09Z");
  CHECK(utc_year(t) == 2020);
  CHECK_THROWS_AS(parse_iso8601_utc("not a date"), IoError);
  CHECK_THROWS_AS(parse_iso8601_utc("2020-13-01T00:00:00"), IoError);
}

TEST_CASE("posts round trip through JSON-lines") {
  auto posts = testfix::synthetic_corpus(50, 91);
  auto path = fs::temp_directory_path() / "titlegen_posts_test.jsonl";
  write_posts_jsonl(path.string(), posts);
  auto loaded = read_posts_jsonl(path.string());
  REQUIRE(loaded.size() == posts.size());
  for (size_t i = 0; i < posts.size(); ++i) {
    CHECK(loaded[i].id == posts[i].id);
    CHECK(loaded[i].creation_epoch_s == posts[i].creation_epoch_s);
    CHECK(loaded[i].title == posts[i].title);
    CHECK(loaded[i].body_markup == posts[i].body_markup);
    CHECK(loaded[i].tags == posts[i].tags);
    CHECK(loaded[i].score == posts[i].score);
    CHECK(loaded[i].has_accepted_answer == posts[i].has_accepted_answer);
    CHECK(loaded[i].is_closed == posts[i].is_closed);
  }
  // writing again is byte-identical
  auto path2 = fs::temp_directory_path() / "titlegen_posts_test2.jsonl";
  write_posts_jsonl(path2.string(), loaded);
  CHECK(read_file(path.string()) == read_file(path2.string()));
  fs::remove(path);
  fs::remove(path2);

  CHECK_THROWS_AS(post_from_json_line("{\"id\": 1}"), std::exception);
  CHECK_THROWS_AS(post_from_json_line("not json"), IoError);
}

TEST_CASE("stack exchange xml rows import as question posts") {
  std::string xml =
      "<?xml version=\"1.0\"?>\n<posts>\n"
      "  <row Id=\"4\" PostTypeId=\"1\" AcceptedAnswerId=\"7\" "
      "CreationDate=\"2008-07-31T21:42:52.667\" Score=\"630\" "
      "Body=\"&lt;p&gt;I want to use a &lt;code&gt;Track-Bar&lt;/code&gt; "
      "thing&lt;/p&gt;\" Title=\"How to convert Decimal?\" "
      "Tags=\"&lt;c#&gt;&lt;floating-point&gt;\" />\n"
      "  <row Id=\"6\" PostTypeId=\"2\" CreationDate=\"2008-07-31T22:08:08.620\" "
      "Score=\"12\" Body=\"answer body\" />\n"
      "  <row Id=\"9\" PostTypeId=\"1\" CreationDate=\"2008-08-01T00:42:38.903\" "
      "Score=\"1\" Body=\"no accept\" Title=\"Closed one\" Tags=\"|java|arrays|\" "
      "ClosedDate=\"2009-01-01T00:00:00\" />\n"
      "</posts>\n";
  std::istringstream in(xml);
  auto posts = import_se_xml(in);
  REQUIRE(posts.size() == 2);  // answers skipped
  CHECK(posts[0].id == 4);
  CHECK(posts[0].has_accepted_answer);
  CHECK(!posts[0].is_closed);
  CHECK(posts[0].score == 630);
  CHECK(posts[0].title == "How to convert Decimal?");
  CHECK(posts[0].body_markup ==
        "<p>I want to use a <code>Track-Bar</code> thing</p>");
  CHECK(posts[0].tags == std::vector<std::string>{"c#", "floating-point"});
  CHECK(posts[1].id == 9);
  CHECK(posts[1].is_closed);
  CHECK(!posts[1].has_accepted_answer);
  CHECK(posts[1].tags == std::vector<std::string>{"java", "arrays"});
}

TEST_CASE("generation records round trip") {
  std::vector<GenerationRecord> records(2);
  records[0].post_id = 7;
  records[0].generated_title = "how to sort";
  records[0].tokens = {"how", "to", "sort"};
  records[0].log_prob = -1.25;
  records[0].copied_token_positions = {2};
  records[1].post_id = 9;
  records[1].generated_title = "";
  records[1].log_prob = -0.5;

  auto path = fs::temp_directory_path() / "titlegen_gen_test.jsonl";
  write_generations_jsonl(path.string(), records);
  auto loaded = read_generations_jsonl(path.string());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].post_id == 7);
  CHECK(loaded[0].tokens == records[0].tokens);
  CHECK(loaded[0].log_prob == doctest::Approx(-1.25));
  CHECK(loaded[0].copied_token_positions == std::vector<int64_t>{2});
  CHECK(loaded[1].generated_title.empty());
  fs::remove(path);
}

TEST_CASE("metric report serialization and table") {
  MetricReport report;
  report.overall = {0.21, 0.44, 0.21, 0.42, 4};
  report.by_language["java"] = {0.2116, 0.4426, 0.2158, 0.4292, 2};
  report.by_language["python"] = {0.2240, 0.4688, 0.2289, 0.4492, 2};
  MetricReport back = metric_report_from_json(metric_report_to_json(report));
  CHECK(back.overall.bleus4 == doctest::Approx(report.overall.bleus4));
  CHECK(back.by_language.size() == 2);
  CHECK(back.by_language.at("java").rougeL ==
        doctest::Approx(report.by_language.at("java").rougeL));

  std::string table = metric_comparison_table({{"model", report}});
  CHECK(table.find("BLEUS-4") != std::string::npos);
  CHECK(table.find("java") != std::string::npos);
  CHECK(table.find("21.16") != std::string::npos);  // percent scale
}

TEST_CASE("run config parses, validates and hashes stably") {
  std::string text = R"({
    "paths": {"corpus": "corpus.jsonl", "workdir": "wd"},
    "filter": {"min_score": 3, "allowed_tags": ["java"], "max_body_tokens": 200,
               "max_title_tokens": 20},
    "split": {"validation_count": 5, "test_count": 7},
    "vocab": {"max_size": 500, "min_count": 2},
    "model": {"d_model": 32, "n_heads": 4, "max_source_len": 256,
              "max_target_len": 30},
    "trainer": {"epochs": 3, "batch_size": 8, "lr": 0.001},
    "decode": {"beam_size": 5, "max_len": 20},
    "fraction": 2,
    "seed": 99
  })";
  RunConfig cfg = RunConfig::from_json(text);
  CHECK(cfg.corpus_path == "corpus.jsonl");
  CHECK(cfg.filter.min_score == 3);
  CHECK(cfg.filter.allowed_tags == std::set<std::string>{"java"});
  CHECK(cfg.split.test_count == 7);
  CHECK(cfg.vocab.min_count == 2);
  CHECK(cfg.model.d_model == 32);
  CHECK(cfg.model.seed == 99);
  CHECK(cfg.trainer.lr == doctest::Approx(0.001));
  CHECK(cfg.decode.beam_size == 5);
  CHECK(cfg.fraction == 2);
  cfg.validate();

  CHECK(cfg.content_hash() == RunConfig::from_json(text).content_hash());
  RunConfig other = RunConfig::from_json(text);
  other.seed = 100;
  CHECK(other.content_hash() != cfg.content_hash());

  RunConfig bad = cfg;
  bad.fraction = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  RunConfig bad2 = cfg;
  bad2.filter.max_body_tokens = 10;
  bad2.filter.max_title_tokens = 20;
  CHECK_THROWS_AS(bad2.validate(), ConfigError);
  RunConfig bad3 = cfg;
  bad3.decode.max_len = 40;  // does not fit max_target_len
  CHECK_THROWS_AS(bad3.validate(), ConfigError);

  CHECK_THROWS_AS(RunConfig::from_json("[]"), ConfigError);

  setenv("TITLEGEN_CORPUS", "/elsewhere/c.jsonl", 1);
  setenv("TITLEGEN_WORKDIR", "/elsewhere/wd", 1);
  cfg.apply_env_overrides();
  CHECK(cfg.corpus_path == "/elsewhere/c.jsonl");
  CHECK(cfg.workdir == "/elsewhere/wd");
  unsetenv("TITLEGEN_CORPUS");
  unsetenv("TITLEGEN_WORKDIR");
}

TEST_CASE("fnv hashing is stable") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(hash_hex(0xabcull).size() == 16);
}
