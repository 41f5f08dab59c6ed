#include <algorithm>
#include <cctype>
#include <map>
#include <regex>

#include "silico/error.hpp"
#include "silico/thematic.hpp"

namespace silico {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string letters_only(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

// Strips markdown emphasis and inline code markers.
std::string clean_cell(std::string s) {
  replace_all(s, "**", "");
  replace_all(s, "__", "");
  replace_all(s, "`", "");
  s = trim(s);
  if (s.size() >= 2 && s.front() == '*' && s.back() == '*') s = trim(s.substr(1, s.size() - 2));
  return s;
}

std::string clean_text(std::string s) {
  static const std::regex br(R"(<br\s*/?>)", std::regex::icase);
  return clean_cell(std::regex_replace(s, br, "; "));
}

std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == '|') {
      cur += '|';
      ++i;
    } else if (line[i] == '|') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += line[i];
    }
  }
  cells.push_back(trim(cur));
  if (!cells.empty() && cells.front().empty()) cells.erase(cells.begin());
  if (!cells.empty() && cells.back().empty()) cells.pop_back();
  return cells;
}

bool is_separator_row(const std::vector<std::string>& cells) {
  static const std::regex sep(R"(^:?-{2,}:?$)");
  return !cells.empty() && std::all_of(cells.begin(), cells.end(), [](const std::string& c) {
    return std::regex_match(c, sep);
  });
}

std::optional<std::size_t> leading_index(std::string_view cell) {
  static const std::regex num(R"(^\D{0,12}?(\d+))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(cell.begin(), cell.end(), m, num)) return std::nullopt;
  return static_cast<std::size_t>(std::stoul(m[1].str()));
}

void assign_categories(ClusterFinding& f, std::string_view cell) {
  std::string s(cell);
  static const std::regex seps(R"(<br\s*/?>|[,;/&+\n]|\band\b)", std::regex::icase);
  s = std::regex_replace(s, seps, "|");
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = std::min(s.find('|', start), s.size());
    const std::string chunk = clean_cell(s.substr(start, end - start));
    start = end + 1;
    if (chunk.empty() || letters_only(chunk).empty()) continue;
    if (auto c = match_category(chunk)) {
      f.categories.insert(*c);
    } else {
      f.unmapped.push_back(chunk);
    }
  }
  f.flagged = !f.unmapped.empty();
}

enum class Column { Index, Title, Summary, Insight, Category, Other };

Column classify_header(const std::string& header) {
  const auto h = lower(clean_cell(header));
  const auto l = letters_only(h);
  if (h == "#" || l == "no" || l == "index" || l == "id" || l == "number" || l == "clusterno" || l == "clusterid" ||
      l == "clusterindex" || l == "clusternumber" || h == "cluster #") {
    return Column::Index;
  }
  if (l.find("insight") != std::string::npos) return Column::Insight;
  if (l.find("categor") != std::string::npos || l.find("archetype") != std::string::npos ||
      l.find("classification") != std::string::npos) {
    return Column::Category;
  }
  if (l.find("theme") != std::string::npos || l.find("summary") != std::string::npos ||
      l.find("topic") != std::string::npos) {
    return Column::Summary;
  }
  if (l == "cluster" || l == "clustername" || l == "name" || l == "label" || l == "title") return Column::Title;
  return Column::Other;
}

bool looks_like_header(const std::vector<std::string>& cells) {
  int known = 0;
  for (const auto& c : cells) {
    if (classify_header(c) != Column::Other && classify_header(c) != Column::Title) ++known;
  }
  return known >= 2 || (known >= 1 && !leading_index(cells.front()));
}

std::vector<ClusterFinding> parse_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<Column> columns;
  std::vector<ClusterFinding> out;
  for (const auto& cells : rows) {
    if (is_separator_row(cells)) continue;
    if (columns.empty() && looks_like_header(cells)) {
      for (const auto& c : cells) columns.push_back(classify_header(c));
      // A lone "Cluster" header holding numbers is the index column.
      if (std::find(columns.begin(), columns.end(), Column::Index) == columns.end()) {
        auto it = std::find(columns.begin(), columns.end(), Column::Title);
        if (it != columns.end()) *it = Column::Index;
      }
      continue;
    }
    std::vector<Column> layout = columns;
    if (layout.empty()) {
      // Headerless: index first, category last, text in between.
      layout.assign(cells.size(), Column::Other);
      if (cells.size() >= 1) layout[0] = Column::Index;
      if (cells.size() >= 2) layout.back() = Column::Category;
      if (cells.size() == 4) {
        layout[1] = Column::Summary;
        layout[2] = Column::Insight;
      } else if (cells.size() >= 5) {
        layout[1] = Column::Title;
        layout[2] = Column::Summary;
        layout[3] = Column::Insight;
      } else if (cells.size() == 3) {
        layout[1] = Column::Summary;
      }
    }
    const auto idx_col = std::find(layout.begin(), layout.end(), Column::Index);
    if (idx_col == layout.end()) continue;
    const auto idx_pos = static_cast<std::size_t>(idx_col - layout.begin());
    if (idx_pos >= cells.size()) continue;
    const auto index = leading_index(cells[idx_pos]);
    if (!index) continue;

    ClusterFinding f;
    f.cluster_index = *index;
    bool saw_category = false;
    for (std::size_t c = 0; c < cells.size() && c < layout.size(); ++c) {
      switch (layout[c]) {
        case Column::Title: f.title = clean_text(cells[c]); break;
        case Column::Summary: f.thematic_summary = clean_text(cells[c]); break;
        case Column::Insight: f.sociological_insight = clean_text(cells[c]); break;
        case Column::Category:
          assign_categories(f, cells[c]);
          saw_category = true;
          break;
        default: break;
      }
    }
    if (!saw_category) continue;
    if (f.thematic_summary.empty()) f.thematic_summary = f.title;
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<ClusterFinding> parse_labeled(const std::vector<std::string>& lines) {
  static const std::regex heading(R"(^[\s#*\->\d.]*cluster\s*#?\s*(\d+)\b\W*(.*)$)", std::regex::icase);
  static const std::regex field(
      R"(^[\s#*\->\d.]*(thematic summary|summary|theme|topic|sociological insight|insight|categories|category|archetype)\s*\**\s*[:\-]\s*\**\s*(.*)$)",
      std::regex::icase);
  std::vector<ClusterFinding> out;
  for (const auto& raw : lines) {
    std::smatch m;
    if (std::regex_match(raw, m, field)) {
      if (out.empty()) continue;
      auto& f = out.back();
      const auto name = letters_only(m[1].str());
      const auto value = clean_text(m[2].str());
      if (name.find("insight") != std::string::npos) {
        f.sociological_insight = value;
      } else if (name.find("categor") != std::string::npos || name == "archetype") {
        assign_categories(f, m[2].str());
      } else {
        f.thematic_summary = value;
      }
    } else if (std::regex_match(raw, m, heading)) {
      ClusterFinding f;
      f.cluster_index = static_cast<std::size_t>(std::stoul(m[1].str()));
      auto title = clean_cell(m[2].str());
      while (!title.empty() && (title.back() == '*' || title.back() == ':')) title.pop_back();
      f.title = trim(title);
      out.push_back(std::move(f));
    }
  }
  for (auto& f : out) {
    if (f.thematic_summary.empty()) f.thematic_summary = f.title;
  }
  return out;
}

void check_complete(const std::vector<ClusterFinding>& findings, std::size_t k) {
  require(!findings.empty(), ErrorKind::Validation, "response contains no recognizable cluster findings");
  std::vector<int> seen(k, 0);
  for (const auto& f : findings) {
    require(f.cluster_index < k, ErrorKind::Validation,
            "response describes cluster " + std::to_string(f.cluster_index) + " but K = " + std::to_string(k));
    require(seen[f.cluster_index]++ == 0, ErrorKind::Validation,
            "duplicate cluster index " + std::to_string(f.cluster_index) + " in response");
    require(!f.categories.empty(), ErrorKind::Validation,
            "cluster " + std::to_string(f.cluster_index) + " has no recognized category");
  }
  std::string missing;
  for (std::size_t i = 0; i < k; ++i) {
    if (!seen[i]) missing += (missing.empty() ? "" : ", ") + std::to_string(i);
  }
  require(missing.empty(), ErrorKind::Validation, "response is missing cluster index " + missing);
}

}  // namespace

std::string_view category_key(Category c) {
  switch (c) {
    case Category::HumanMimicry: return "HumanMimicry";
    case Category::SiliconCentricity: return "SiliconCentricity";
    case Category::Noise: return "Noise";
  }
  return "";
}

std::string_view category_display(Category c) {
  switch (c) {
    case Category::HumanMimicry: return "Human Mimicry";
    case Category::SiliconCentricity: return "Silicon-Centricity";
    case Category::Noise: return "Noise";
  }
  return "";
}

std::optional<Category> match_category(std::string_view text) {
  const auto l = letters_only(text);
  if (l == "humanmimicry") return Category::HumanMimicry;
  if (l == "siliconcentricity" || l == "siliconcentric") return Category::SiliconCentricity;
  if (l == "noise") return Category::Noise;
  return std::nullopt;
}

std::vector<ClusterFinding> parse_report(std::string_view text, std::size_t k) {
  require(k >= 1, ErrorKind::Validation, "K must be at least 1");
  require(!trim(text).empty(), ErrorKind::Validation, "empty response");

  std::vector<std::string> lines;
  std::vector<std::vector<std::string>> table_rows;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    auto line = std::string(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    start = end + 1;
    const auto t = trim(line);
    if (!t.empty() && t.front() == '|') table_rows.push_back(split_row(t));
    lines.push_back(std::move(line));
  }

  auto findings = table_rows.empty() ? std::vector<ClusterFinding>{} : parse_table(table_rows);
  if (findings.empty()) findings = parse_labeled(lines);
  check_complete(findings, k);
  std::sort(findings.begin(), findings.end(),
            [](const auto& a, const auto& b) { return a.cluster_index < b.cluster_index; });
  return findings;
}

}  // namespace silico
