#include "titlegen/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "titlegen/errors.hpp"
#include "titlegen/util.hpp"

namespace titlegen {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

QuestionPost post_from_json_line(const std::string& line) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw IoError("corpus line is not a JSON object: " + line.substr(0, 80));
  }
  QuestionPost post;
  post.id = j.at("id").get<int64_t>();
  const auto& date = j.at("creation_date");
  if (date.is_number_integer()) {
    post.creation_epoch_s = date.get<int64_t>();
  } else {
    post.creation_epoch_s = parse_iso8601_utc(date.get<std::string>());
  }
  post.title = j.at("title").get<std::string>();
  post.body_markup = j.at("body_markup").get<std::string>();
  post.tags = j.at("tags").get<std::vector<std::string>>();
  post.score = j.at("score").get<int>();
  post.has_accepted_answer = j.at("has_accepted_answer").get<bool>();
  post.is_closed = j.at("is_closed").get<bool>();
  return post;
}

std::string post_to_json_line(const QuestionPost& post) {
  ordered_json j;
  j["id"] = post.id;
  j["creation_date"] = format_iso8601_utc(post.creation_epoch_s);
  j["title"] = post.title;
  j["body_markup"] = post.body_markup;
  j["tags"] = post.tags;
  j["score"] = post.score;
  j["has_accepted_answer"] = post.has_accepted_answer;
  j["is_closed"] = post.is_closed;
  return j.dump();
}

std::vector<QuestionPost> read_posts_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus: " + path);
  std::vector<QuestionPost> posts;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      posts.push_back(post_from_json_line(line));
    } catch (const std::exception& e) {
      throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return posts;
}

void write_posts_jsonl(const std::string& path,
                       const std::vector<QuestionPost>& posts) {
  std::string out;
  for (const auto& post : posts) {
    out += post_to_json_line(post);
    out += '\n';
  }
  write_file(path, out);
}

namespace {

json quartiles_json(const Quartiles& q) {
  return json{{"min", q.min}, {"q1", q.q1}, {"median", q.median},
              {"q3", q.q3},   {"max", q.max}};
}

}  // namespace

std::string stats_to_json(const StatsReport& report) {
  ordered_json j;
  j["posts"] = report.posts;
  j["by_year"] = json::array();
  for (const auto& y : report.by_year) {
    ordered_json row;
    row["year"] = y.year;
    row["posts"] = y.posts;
    row["frac_with_text"] = y.frac_with_text;
    row["frac_with_code"] = y.frac_with_code;
    row["mean_overlap_title_text"] = y.mean_overlap_title_text;
    row["mean_overlap_title_code"] = y.mean_overlap_title_code;
    j["by_year"].push_back(row);
  }
  j["body_length"] = quartiles_json(report.body_len);
  j["text_length"] = quartiles_json(report.text_len);
  j["code_length"] = quartiles_json(report.code_len);
  j["frac_body_over_200"] = report.frac_body_over_200;
  return j.dump(2);
}

namespace {

std::string fixed(double v, int precision = 3) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

void append_row(std::string& out, const std::vector<std::string>& cells,
                const std::vector<size_t>& widths) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out += "  ";
    std::string cell = cells[i];
    if (cell.size() < widths[i]) cell.insert(0, widths[i] - cell.size(), ' ');
    out += cell;
  }
  out += '\n';
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (size_t i = 0; i < row.size(); ++i) {
      widths[i] = std::max(widths[i], row[i].size());
    }
  }
  std::string out;
  for (const auto& row : rows) append_row(out, row, widths);
  return out;
}

}  // namespace

std::string stats_to_table(const StatsReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"year", "posts", "with_text", "with_code", "overlap_text",
                  "overlap_code"});
  for (const auto& y : report.by_year) {
    rows.push_back({std::to_string(y.year), std::to_string(y.posts),
                    fixed(y.frac_with_text), fixed(y.frac_with_code),
                    fixed(y.mean_overlap_title_text),
                    fixed(y.mean_overlap_title_code)});
  }
  std::string out = render_table(rows);

  out += '\n';
  std::vector<std::vector<std::string>> lengths;
  lengths.push_back({"tokens", "min", "q1", "median", "q3", "max"});
  auto push_q = [&](const std::string& name, const Quartiles& q) {
    lengths.push_back({name, fixed(q.min, 1), fixed(q.q1, 1), fixed(q.median, 1),
                       fixed(q.q3, 1), fixed(q.max, 1)});
  };
  push_q("body", report.body_len);
  push_q("text", report.text_len);
  push_q("code", report.code_len);
  out += render_table(lengths);
  out += "\nposts: " + std::to_string(report.posts);
  out += "\nbodies over 200 tokens: " + fixed(report.frac_body_over_200) + "\n";
  return out;
}

std::vector<GenerationRecord> read_generations_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open generations: " + path);
  std::vector<GenerationRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    GenerationRecord rec;
    rec.post_id = j.at("post_id").get<int64_t>();
    rec.generated_title = j.at("generated_title").get<std::string>();
    rec.tokens = j.at("tokens").get<std::vector<std::string>>();
    rec.log_prob = j.at("log_prob").get<double>();
    rec.copied_token_positions =
        j.at("copied_token_positions").get<std::vector<int64_t>>();
    records.push_back(std::move(rec));
  }
  return records;
}

void write_generations_jsonl(const std::string& path,
                             const std::vector<GenerationRecord>& records) {
  std::string out;
  for (const auto& rec : records) {
    ordered_json j;
    j["post_id"] = rec.post_id;
    j["generated_title"] = rec.generated_title;
    j["tokens"] = rec.tokens;
    j["log_prob"] = rec.log_prob;
    j["copied_token_positions"] = rec.copied_token_positions;
    out += j.dump();
    out += '\n';
  }
  write_file(path, out);
}

namespace {

json metric_row_json(const MetricRow& row) {
  return json{{"bleus4", row.bleus4}, {"rouge1", row.rouge1},
              {"rouge2", row.rouge2}, {"rougeL", row.rougeL},
              {"examples", row.examples}};
}

MetricRow metric_row_from(const json& j) {
  MetricRow row;
  row.bleus4 = j.at("bleus4").get<double>();
  row.rouge1 = j.at("rouge1").get<double>();
  row.rouge2 = j.at("rouge2").get<double>();
  row.rougeL = j.at("rougeL").get<double>();
  row.examples = j.at("examples").get<size_t>();
  return row;
}

}  // namespace

std::string metric_report_to_json(const MetricReport& report) {
  ordered_json j;
  j["overall"] = metric_row_json(report.overall);
  ordered_json langs = ordered_json::object();
  for (const auto& [lang, row] : report.by_language) {
    langs[lang] = metric_row_json(row);
  }
  j["by_language"] = langs;
  return j.dump(2);
}

MetricReport metric_report_from_json(const std::string& text) {
  json j = json::parse(text);
  MetricReport report;
  report.overall = metric_row_from(j.at("overall"));
  for (const auto& [lang, row] : j.at("by_language").items()) {
    report.by_language[lang] = metric_row_from(row);
  }
  return report;
}

std::string metric_comparison_table(
    const std::vector<std::pair<std::string, MetricReport>>& models) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"model", "language", "BLEUS-4", "ROUGE-1", "ROUGE-2", "ROUGE-L"});
  auto pct = [](double v) { return fixed(100.0 * v, 2); };
  for (const auto& [name, report] : models) {
    for (const auto& [lang, row] : report.by_language) {
      rows.push_back({name, lang, pct(row.bleus4), pct(row.rouge1),
                      pct(row.rouge2), pct(row.rougeL)});
    }
    rows.push_back({name, "all", pct(report.overall.bleus4),
                    pct(report.overall.rouge1), pct(report.overall.rouge2),
                    pct(report.overall.rougeL)});
  }
  return render_table(rows);
}

namespace {

std::string xml_unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    size_t semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 12) {
      out += s[i++];
      continue;
    }
    std::string_view entity = s.substr(i + 1, semi - i - 1);
    if (entity == "lt") {
      out += '<';
    } else if (entity == "gt") {
      out += '>';
    } else if (entity == "amp") {
      out += '&';
    } else if (entity == "quot") {
      out += '"';
    } else if (entity == "apos") {
      out += '\'';
    } else if (!entity.empty() && entity[0] == '#') {
      uint32_t cp = 0;
      bool ok = entity.size() > 1;
      if (entity.size() > 2 && (entity[1] == 'x' || entity[1] == 'X')) {
        for (size_t k = 2; k < entity.size() && ok; ++k) {
          char c = entity[k];
          cp <<= 4;
          if (c >= '0' && c <= '9') cp |= c - '0';
          else if (c >= 'a' && c <= 'f') cp |= c - 'a' + 10;
          else if (c >= 'A' && c <= 'F') cp |= c - 'A' + 10;
          else ok = false;
        }
      } else {
        for (size_t k = 1; k < entity.size() && ok; ++k) {
          char c = entity[k];
          if (c < '0' || c > '9') { ok = false; break; }
          cp = cp * 10 + static_cast<uint32_t>(c - '0');
        }
      }
      if (!ok || cp > 0x10FFFF) {
        out += s[i++];
        continue;
      }
      // encode codepoint as UTF-8
      if (cp < 0x80) {
        out += static_cast<char>(cp);
      } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
      } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
      } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
      }
    } else {
      out += s[i];
      ++i;
      continue;
    }
    i = semi + 1;
  }
  return out;
}

std::vector<std::string> parse_tags(const std::string& raw) {
  std::vector<std::string> tags;
  if (raw.find('<') != std::string::npos) {
    size_t i = 0;
    while (i < raw.size()) {
      size_t open = raw.find('<', i);
      if (open == std::string::npos) break;
      size_t close = raw.find('>', open);
      if (close == std::string::npos) break;
      if (close > open + 1) {
        tags.push_back(to_lower_ascii(raw.substr(open + 1, close - open - 1)));
      }
      i = close + 1;
    }
  } else {
    size_t i = 0;
    while (i < raw.size()) {
      size_t bar = raw.find('|', i);
      std::string tag = raw.substr(i, bar == std::string::npos ? bar : bar - i);
      if (!tag.empty()) tags.push_back(to_lower_ascii(tag));
      if (bar == std::string::npos) break;
      i = bar + 1;
    }
  }
  return tags;
}

// Pulls attribute values out of one <row .../> element.
bool parse_row_attributes(const std::string& line,
                          std::vector<std::pair<std::string, std::string>>& attrs) {
  size_t row = line.find("<row ");
  if (row == std::string::npos) return false;
  attrs.clear();
  size_t i = row + 5;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size() || line[i] == '/' || line[i] == '>') break;
    size_t eq = line.find('=', i);
    if (eq == std::string::npos) return false;
    std::string name = line.substr(i, eq - i);
    size_t q1 = line.find('"', eq);
    if (q1 == std::string::npos) return false;
    size_t q2 = line.find('"', q1 + 1);
    if (q2 == std::string::npos) return false;
    attrs.emplace_back(name, line.substr(q1 + 1, q2 - q1 - 1));
    i = q2 + 1;
  }
  return true;
}

}  // namespace

std::vector<QuestionPost> import_se_xml(std::istream& in) {
  std::vector<QuestionPost> posts;
  std::string line;
  std::vector<std::pair<std::string, std::string>> attrs;
  while (std::getline(in, line)) {
    if (line.find("<row ") == std::string::npos) continue;
    if (!parse_row_attributes(line, attrs)) continue;
    QuestionPost post;
    bool is_question = false;
    bool has_id = false;
    for (const auto& [name, raw] : attrs) {
      if (name == "PostTypeId") {
        is_question = raw == "1";
      } else if (name == "Id") {
        post.id = std::stoll(raw);
        has_id = true;
      } else if (name == "CreationDate") {
        post.creation_epoch_s = parse_iso8601_utc(raw);
      } else if (name == "Score") {
        post.score = std::stoi(raw);
      } else if (name == "Title") {
        post.title = xml_unescape(raw);
      } else if (name == "Body") {
        post.body_markup = xml_unescape(raw);
      } else if (name == "Tags") {
        post.tags = parse_tags(xml_unescape(raw));
      } else if (name == "AcceptedAnswerId") {
        post.has_accepted_answer = true;
      } else if (name == "ClosedDate") {
        post.is_closed = true;
      }
    }
    if (is_question && has_id) posts.push_back(std::move(post));
  }
  return posts;
}

std::vector<QuestionPost> import_se_xml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open xml dump: " + path);
  return import_se_xml(in);
}

}  // namespace titlegen
