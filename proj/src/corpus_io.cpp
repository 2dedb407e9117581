#include "autokey/corpus_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "autokey/error.hpp"

namespace autokey {
namespace {

using nlohmann::json;

std::string require_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(std::string("missing \"") + key + "\"");
  if (!it->is_string()) throw Error(std::string("\"") + key + "\" is not a string");
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.is_array()) throw Error(std::string("\"") + key + "\" is not a list");
  std::vector<std::string> out;
  for (const json& v : j) {
    if (!v.is_string()) throw Error(std::string("\"") + key + "\" has a non-string entry");
    out.push_back(v.get<std::string>());
  }
  return out;
}

json surfaces(const std::vector<Token>& tokens) {
  json arr = json::array();
  for (const Token& t : tokens) arr.push_back(t.surface);
  return arr;
}

std::vector<Token> tokens_of(const json& j, const char* key) {
  std::vector<Token> out;
  for (std::string& s : string_list(j, key)) out.push_back(make_token(std::move(s)));
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

IngestResult read_corpus_jsonl(std::istream& in) {
  IngestResult result;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++result.lines;
    CorpusRecord r;
    try {
      json j = json::parse(line);
      if (!j.is_object()) throw Error("not a JSON object");
      r.id = require_string(j, "id");
      if (r.id.empty()) throw Error("empty \"id\"");
      r.title = require_string(j, "title");
      r.abstract = require_string(j, "abstract");
      if (auto it = j.find("keywords"); it != j.end() && !it->is_null()) r.keywords = string_list(*it, "keywords");
    } catch (const json::exception& e) {
      result.warnings.push_back("line " + std::to_string(lineno) + ": invalid JSON (" + e.what() + ")");
      continue;
    } catch (const Error& e) {
      result.warnings.push_back("line " + std::to_string(lineno) + ": " + e.what());
      continue;
    }
    if (!ids.insert(r.id).second) {
      throw Error("line " + std::to_string(lineno) + ": duplicate id '" + r.id + "'");
    }
    result.records.push_back(std::move(r));
  }
  return result;
}

IngestResult read_corpus_jsonl(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_corpus_jsonl(in);
}

void write_corpus_jsonl(std::ostream& out, const std::vector<CorpusRecord>& records) {
  for (const CorpusRecord& r : records) {
    json j = {{"id", r.id}, {"title", r.title}, {"abstract", r.abstract}};
    if (r.keywords) j["keywords"] = *r.keywords;
    out << j.dump() << '\n';
  }
}

StoredDocument make_stored(const CorpusRecord& record) {
  return {Document::from_text(record.id, record.title, record.abstract), record.keywords};
}

void write_store(std::ostream& out, const std::vector<StoredDocument>& docs) {
  for (const StoredDocument& d : docs) {
    json j = {{"id", d.doc.id}, {"title", surfaces(d.doc.title)}, {"body", surfaces(d.doc.body)}};
    if (d.keywords) j["keywords"] = *d.keywords;
    out << j.dump() << '\n';
  }
}

std::vector<StoredDocument> read_store(std::istream& in) {
  std::vector<StoredDocument> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      StoredDocument d{Document::from_tokens(require_string(j, "id"), tokens_of(j.at("title"), "title"),
                                             tokens_of(j.at("body"), "body")),
                       std::nullopt};
      if (auto it = j.find("keywords"); it != j.end()) d.keywords = string_list(*it, "keywords");
      out.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw Error("store line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("store line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<StoredDocument> read_store(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_store(in);
}

std::vector<Document> documents_of(const std::vector<StoredDocument>& store) {
  std::vector<Document> out;
  out.reserve(store.size());
  for (const StoredDocument& d : store) out.push_back(d.doc);
  return out;
}

}  // namespace autokey
