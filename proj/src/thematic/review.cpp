#include <nlohmann/json.hpp>

#include "silico/error.hpp"
#include "silico/thematic.hpp"
#include "silico/util.hpp"

namespace silico {

using nlohmann::json;

namespace {

std::string_view field_name(EditField f) {
  switch (f) {
    case EditField::ThematicSummary: return "thematic_summary";
    case EditField::SociologicalInsight: return "sociological_insight";
    case EditField::Categories: return "categories";
  }
  return "";
}

EditField parse_field(const std::string& name) {
  if (name == "thematic_summary") return EditField::ThematicSummary;
  if (name == "sociological_insight") return EditField::SociologicalInsight;
  if (name == "categories") return EditField::Categories;
  fail(ErrorKind::Validation, "edit targets unknown field: " + name);
}

std::set<Category> parse_category_value(const json& value) {
  std::vector<std::string> names;
  if (value.is_string()) {
    names.push_back(value.get<std::string>());
  } else if (value.is_array()) {
    for (const auto& v : value) {
      require(v.is_string(), ErrorKind::Validation, "category edit values must be strings");
      names.push_back(v.get<std::string>());
    }
  } else {
    fail(ErrorKind::Validation, "category edit value must be a string or a list of strings");
  }
  std::set<Category> out;
  for (const auto& n : names) {
    const auto c = match_category(n);
    require(c.has_value(), ErrorKind::Validation, "unknown category in edit: " + n);
    out.insert(*c);
  }
  require(!out.empty(), ErrorKind::Validation, "category edit must name at least one category");
  return out;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

json categories_json(const std::set<Category>& cats) {
  json arr = json::array();
  for (auto c : cats) arr.push_back(category_key(c));
  return arr;
}

json finding_json(const ClusterFinding& f) {
  return {{"cluster", f.cluster_index},
          {"title", f.title},
          {"thematic_summary", f.thematic_summary},
          {"sociological_insight", f.sociological_insight},
          {"categories", categories_json(f.categories)},
          {"unmapped", f.unmapped},
          {"flagged", f.flagged}};
}

ClusterFinding finding_from_json(const json& j) {
  ClusterFinding f;
  f.cluster_index = j.at("cluster").get<std::size_t>();
  f.title = j.value("title", "");
  f.thematic_summary = j.at("thematic_summary").get<std::string>();
  f.sociological_insight = j.at("sociological_insight").get<std::string>();
  for (const auto& c : j.at("categories")) {
    const auto cat = match_category(c.get<std::string>());
    require(cat.has_value(), ErrorKind::Validation, "stored report holds unknown category " + c.dump());
    f.categories.insert(*cat);
  }
  f.unmapped = j.value("unmapped", std::vector<std::string>{});
  f.flagged = j.value("flagged", false);
  return f;
}

json edit_json(const ReviewEdit& e) {
  json value = e.field == EditField::Categories ? categories_json(e.category_value) : json(e.text_value);
  return {{"cluster", e.cluster_index}, {"field", field_name(e.field)}, {"value", value},
          {"reviewer", e.reviewer},     {"rationale", e.rationale},     {"ts", e.timestamp}};
}

std::string md_cell(std::string s) {
  for (std::size_t pos = s.find('|'); pos != std::string::npos; pos = s.find('|', pos + 2)) s.replace(pos, 1, "\\|");
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

std::vector<ReviewEdit> parse_edits(std::string_view jsonl) {
  std::vector<ReviewEdit> out;
  std::size_t start = 0, line_no = 0;
  while (start < jsonl.size()) {
    const std::size_t end = std::min(jsonl.find('\n', start), jsonl.size());
    const auto line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = json::parse(line);
      ReviewEdit e;
      e.cluster_index = j.at("cluster").get<std::size_t>();
      e.field = parse_field(j.at("field").get<std::string>());
      if (e.field == EditField::Categories) {
        e.category_value = parse_category_value(j.at("value"));
      } else {
        e.text_value = j.at("value").get<std::string>();
      }
      e.reviewer = j.value("reviewer", "");
      e.rationale = j.value("rationale", "");
      e.timestamp = j.value("ts", "");
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      fail(ErrorKind::Validation, "edits line " + std::to_string(line_no) + ": " + ex.what());
    } catch (const Error& ex) {
      fail(ex.kind(), "edits line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<ReviewEdit> load_edits(const std::filesystem::path& path) { return parse_edits(read_file(path)); }

FinalThematicReport apply_review(const RawThematicReport& raw, const std::vector<ReviewEdit>& edits,
                                 const std::string& approver, std::string approved_at) {
  require(!blank(approver), ErrorKind::Validation, "review needs an approver");
  FinalThematicReport out;
  out.base = raw;
  out.edits = edits;
  out.findings = raw.findings;
  out.approved_by = approver;
  out.approved_at = approved_at.empty() ? utc_now_iso8601() : std::move(approved_at);
  for (std::size_t i = 0; i < edits.size(); ++i) {
    const auto& e = edits[i];
    require(e.cluster_index < out.findings.size(), ErrorKind::Validation,
            "edit " + std::to_string(i + 1) + " targets unknown cluster " + std::to_string(e.cluster_index));
    require(!blank(e.rationale), ErrorKind::Validation, "edit " + std::to_string(i + 1) + " has an empty rationale");
    auto& f = out.findings[e.cluster_index];
    switch (e.field) {
      case EditField::ThematicSummary: f.thematic_summary = e.text_value; break;
      case EditField::SociologicalInsight: f.sociological_insight = e.text_value; break;
      case EditField::Categories:
        require(!e.category_value.empty(), ErrorKind::Validation, "category edit must name at least one category");
        f.categories = e.category_value;
        f.unmapped.clear();
        f.flagged = false;
        break;
    }
  }
  return out;
}

json raw_report_json(const RawThematicReport& r) {
  json findings = json::array();
  for (const auto& f : r.findings) findings.push_back(finding_json(f));
  return {{"schema", "raw-report/1"},         {"provider_tag", r.provider_tag}, {"prompt_version", r.prompt_version},
          {"image_digest", r.image_digest}, {"response_text", r.response_text}, {"findings", findings}};
}

RawThematicReport raw_report_from_json(const json& j) {
  try {
    require(j.at("schema") == "raw-report/1", ErrorKind::Validation, "unsupported raw report schema");
    RawThematicReport r;
    r.provider_tag = j.at("provider_tag").get<std::string>();
    r.prompt_version = j.at("prompt_version").get<std::string>();
    r.image_digest = j.at("image_digest").get<std::string>();
    r.response_text = j.at("response_text").get<std::string>();
    for (const auto& f : j.at("findings")) r.findings.push_back(finding_from_json(f));
    for (std::size_t i = 0; i < r.findings.size(); ++i) {
      require(r.findings[i].cluster_index == i, ErrorKind::Validation, "raw report findings are not indexed 0..K-1");
    }
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, std::string("malformed raw report: ") + e.what());
  }
}

json final_report_json(const FinalThematicReport& r) {
  json edits = json::array();
  for (const auto& e : r.edits) edits.push_back(edit_json(e));
  json findings = json::array();
  for (const auto& f : r.findings) findings.push_back(finding_json(f));
  return {{"schema", "final-report/1"},
          {"base", raw_report_json(r.base)},
          {"edits", edits},
          {"findings", findings},
          {"approved_by", r.approved_by},
          {"approved_at", r.approved_at}};
}

std::string render_markdown_table(const std::vector<ClusterFinding>& findings) {
  std::string out =
      "| No. | Cluster | Theme | Sociological Insight | Category |\n"
      "|---|---|---|---|---|\n";
  for (const auto& f : findings) {
    std::string cats;
    for (auto c : f.categories) cats += (cats.empty() ? "" : "<br>") + std::string(category_display(c));
    out += "| " + std::to_string(f.cluster_index) + " | " + md_cell(f.title) + " | " + md_cell(f.thematic_summary) +
           " | " + md_cell(f.sociological_insight) + " | " + cats + " |\n";
  }
  return out;
}

}  // namespace silico
