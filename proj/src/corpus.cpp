#include "mlsa/corpus.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include "mlsa/errors.hpp"

namespace mlsa {

using json = nlohmann::ordered_json;

const char* label_name(Label l) {
  switch (l) {
    case Label::Positive: return "pos";
    case Label::Negative: return "neg";
    case Label::Unlabeled: return "unlabeled";
  }
  return "?";
}

namespace {

bool is_blank(const std::string& s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string where(const std::string& path, size_t line) {
  return path + ":" + std::to_string(line);
}

} // namespace

void validate_review(const Review& r) {
  if (r.id.empty()) throw ValidationError("review id is empty");
  if (is_blank(r.text))
    throw ValidationError("review '" + r.id + "' has empty text");
  if (r.lang.size() != 2 || !std::islower(static_cast<unsigned char>(r.lang[0])) ||
      !std::islower(static_cast<unsigned char>(r.lang[1])))
    throw ValidationError("review '" + r.id + "' has invalid lang tag '" + r.lang +
                          "' (expected two lowercase ASCII letters)");
}

LabeledDataset load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open dataset file: " + path);

  LabeledDataset ds;
  ds.name = std::filesystem::path(path).stem().string();

  std::unordered_set<std::string> seen_ids;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(where(path, lineno) + ": malformed JSON line: " + e.what());
    }
    if (!obj.is_object())
      throw ParseError(where(path, lineno) + ": line is not a JSON object");

    for (const char* key : {"id", "text", "label", "lang", "domain"})
      if (!obj.contains(key))
        throw ParseError(where(path, lineno) + ": missing key '" + key + "'");

    Review r;
    try {
      r.id = obj.at("id").get<std::string>();
      r.text = obj.at("text").get<std::string>();
      r.lang = obj.at("lang").get<std::string>();
      r.domain = obj.at("domain").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(where(path, lineno) + ": bad field type: " + e.what());
    }

    const json& lab = obj.at("label");
    if (lab.is_null()) {
      r.label = Label::Unlabeled;
    } else if (lab.is_string() && lab.get<std::string>() == "pos") {
      r.label = Label::Positive;
    } else if (lab.is_string() && lab.get<std::string>() == "neg") {
      r.label = Label::Negative;
    } else {
      throw ParseError(where(path, lineno) +
                       ": label must be \"pos\", \"neg\", or null");
    }

    try {
      validate_review(r);
    } catch (const ValidationError& e) {
      throw ValidationError(where(path, lineno) + ": " + e.what());
    }
    if (!seen_ids.insert(r.id).second)
      throw ValidationError(where(path, lineno) + ": duplicate id '" + r.id + "'");

    ds.reviews.push_back(std::move(r));
  }

  if (ds.reviews.empty()) throw ValidationError("dataset is empty: " + path);
  return ds;
}

void save_jsonl(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write dataset file: " + path);
  for (const Review& r : ds.reviews) {
    json obj;
    obj["id"] = r.id;
    obj["text"] = r.text;
    if (r.label == Label::Unlabeled)
      obj["label"] = nullptr;
    else
      obj["label"] = label_name(r.label);
    obj["lang"] = r.lang;
    obj["domain"] = r.domain;
    out << obj.dump() << "\n";
  }
  if (!out) throw Error("write failed: " + path);
}

LabelDistribution label_distribution(const LabeledDataset& ds) {
  LabelDistribution dist;
  for (const Review& r : ds.reviews) {
    switch (r.label) {
      case Label::Positive: ++dist.positives; break;
      case Label::Negative: ++dist.negatives; break;
      case Label::Unlabeled: ++dist.unlabeled; break;
    }
  }
  return dist;
}

LabeledDataset merge(const std::vector<LabeledDataset>& datasets) {
  if (datasets.empty()) throw ValidationError("merge: no datasets given");

  LabeledDataset out;
  std::unordered_set<std::string> ids;
  for (size_t i = 0; i < datasets.size(); ++i) {
    if (i) out.name += "+";
    out.name += datasets[i].name;
    for (const Review& r : datasets[i].reviews) {
      Review copy = r;
      if (!ids.insert(copy.id).second) {
        copy.id = datasets[i].name + "/" + copy.id;
        if (!ids.insert(copy.id).second)
          throw ValidationError("merge: id collision even after prefixing: '" +
                                copy.id + "'");
      }
      out.reviews.push_back(std::move(copy));
    }
  }
  return out;
}

} // namespace mlsa
