#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "titlegen/corpus.hpp"
#include "titlegen/metrics.hpp"

namespace titlegen {

// --- JSON-lines corpus (UTF-8, one object per line) ---

QuestionPost post_from_json_line(const std::string& line);
std::string post_to_json_line(const QuestionPost& post);
std::vector<QuestionPost> read_posts_jsonl(const std::string& path);
void write_posts_jsonl(const std::string& path,
                       const std::vector<QuestionPost>& posts);

// --- stats report ---

std::string stats_to_json(const StatsReport& report);
std::string stats_to_table(const StatsReport& report);

// --- batch generation records ---

struct GenerationRecord {
  int64_t post_id = 0;
  std::string generated_title;
  std::vector<std::string> tokens;
  double log_prob = 0;
  std::vector<int64_t> copied_token_positions;
};

std::vector<GenerationRecord> read_generations_jsonl(const std::string& path);
void write_generations_jsonl(const std::string& path,
                             const std::vector<GenerationRecord>& records);

// --- metric reports ---

std::string metric_report_to_json(const MetricReport& report);
MetricReport metric_report_from_json(const std::string& text);
/// Table layout: one block per model, one row per language plus "all",
/// scores scaled to percentages.
std::string metric_comparison_table(
    const std::vector<std::pair<std::string, MetricReport>>& models);

// --- Stack Exchange XML dump importer ---

/// Parses Posts.xml rows (PostTypeId=1 only) into QuestionPost records:
/// has_accepted_answer = AcceptedAnswerId present, is_closed = ClosedDate
/// present, tags from either "<a><b>" or "|a|b|" encodings.
std::vector<QuestionPost> import_se_xml(std::istream& in);
std::vector<QuestionPost> import_se_xml_file(const std::string& path);

}  // namespace titlegen
