#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "silico/acquisition.hpp"
#include "silico/util.hpp"

namespace silico {

using nlohmann::json;

namespace {

std::optional<std::string> scalar_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  return std::nullopt;
}

std::optional<std::string> optional_text(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

}  // namespace

std::optional<SubmoltRecord> decode_record(const json& obj) {
  if (!obj.is_object()) return std::nullopt;
  SubmoltRecord r;
  auto id = obj.find("id");
  auto name = obj.find("name");
  if (id == obj.end() || name == obj.end()) return std::nullopt;
  auto id_text = scalar_string(*id);
  if (!id_text || id_text->empty() || !name->is_string()) return std::nullopt;
  r.id = std::move(*id_text);
  r.name = name->get<std::string>();

  if (auto d = obj.find("description"); d != obj.end() && !d->is_null()) {
    if (!d->is_string()) return std::nullopt;
    r.description = d->get<std::string>();
  }
  r.display_name = optional_text(obj, "display_name");
  r.created_at = optional_text(obj, "created_at");
  if (auto c = obj.find("creator"); c != obj.end() && !c->is_null()) {
    if (c->is_object() && c->contains("name") && (*c)["name"].is_string()) {
      r.creator = (*c)["name"].get<std::string>();
    } else {
      r.creator = c->is_string() ? c->get<std::string>() : c->dump();
    }
  }

  static const std::set<std::string, std::less<>> kKnown = {"id", "name", "description", "display_name",
                                                            "created_at", "creator"};
  for (const auto& [key, value] : obj.items()) {
    if (kKnown.contains(key)) continue;
    r.extra[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return r;
}

json encode_record(const SubmoltRecord& r) {
  json j = json::object();
  j["id"] = r.id;
  j["name"] = r.name;
  if (r.display_name) j["display_name"] = *r.display_name;
  j["description"] = r.description;
  if (r.created_at) j["created_at"] = *r.created_at;
  if (r.creator) j["creator"] = *r.creator;
  j["extra"] = r.extra;
  return j;
}

std::string compute_snapshot_id(const std::vector<SubmoltRecord>& records) {
  std::string material;
  for (const auto& r : records) {
    material += r.id;
    material.push_back('\0');
    material += r.description;
    material.push_back('\0');
  }
  return "snap-" + sha256_hex(material).substr(0, 16);
}

std::string serialize_snapshot(const CorpusSnapshot& s) {
  json header = {
      {"schema", kSnapshotSchema},
      {"snapshot_id", s.snapshot_id},
      {"base_url", s.base_url},
      {"fetched_at", s.fetched_at},
      {"tool_version", s.tool_version},
      {"pages_fetched", s.pages_fetched},
      {"complete", s.complete},
      {"malformed", s.malformed},
      {"collisions", s.collisions},
      {"record_count", s.records.size()},
  };
  std::string out = header.dump() + "\n";
  for (const auto& r : s.records) {
    out += encode_record(r).dump();
    out.push_back('\n');
  }
  return out;
}

CorpusSnapshot parse_snapshot(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Validation, "snapshot is empty");

  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, std::string("snapshot header is not JSON: ") + e.what());
  }
  const std::string schema = header.value("schema", "");
  if (schema != kSnapshotSchema) {
    fail(ErrorKind::Validation, "unsupported snapshot schema version '" + schema + "' (expected '" +
                                    std::string(kSnapshotSchema) + "')");
  }

  CorpusSnapshot s;
  try {
    s.snapshot_id = header.at("snapshot_id").get<std::string>();
    s.base_url = header.at("base_url").get<std::string>();
    s.fetched_at = header.at("fetched_at").get<std::string>();
    s.tool_version = header.at("tool_version").get<std::string>();
    s.pages_fetched = header.value("pages_fetched", std::size_t{0});
    s.complete = header.value("complete", true);
    s.malformed = header.value("malformed", std::size_t{0});
    s.collisions = header.value("collisions", std::size_t{0});
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, std::string("snapshot header incomplete: ") + e.what());
  }

  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorKind::Validation, "snapshot line " + std::to_string(line_no) + " is not JSON");
    }
    auto rec = decode_record(obj);
    if (!rec) fail(ErrorKind::Validation, "snapshot line " + std::to_string(line_no) + " is not a valid record");
    // Stored records keep unknown fields under "extra"; restore them.
    rec->extra.clear();
    if (auto e = obj.find("extra"); e != obj.end()) {
      for (const auto& [k, v] : e->items()) rec->extra[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    if (!seen.insert(rec->id).second) {
      fail(ErrorKind::Validation, "duplicate record id in snapshot: " + rec->id);
    }
    s.records.push_back(std::move(*rec));
  }
  if (header.contains("record_count") && header["record_count"].get<std::size_t>() != s.records.size()) {
    fail(ErrorKind::Validation, "snapshot record count does not match header");
  }
  return s;
}

void save_snapshot(const CorpusSnapshot& snapshot, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_snapshot(snapshot));
}

CorpusSnapshot load_snapshot(const std::filesystem::path& path) { return parse_snapshot(read_file(path)); }

std::filesystem::path incomplete_path_for(const std::filesystem::path& snapshot_path) {
  auto p = snapshot_path;
  p += ".incomplete";
  return p;
}

}  // namespace silico
