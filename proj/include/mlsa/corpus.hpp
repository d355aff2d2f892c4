#ifndef MLSA_CORPUS_HPP
#define MLSA_CORPUS_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace mlsa {

enum class Label { Positive, Negative, Unlabeled };

const char* label_name(Label l);

struct Review {
  std::string id;
  std::string text;   // stored as-is, validated nonempty after trimming
  Label label = Label::Unlabeled;
  std::string lang;   // two lowercase ASCII letters
  std::string domain;
};

struct LabeledDataset {
  std::string name;
  std::vector<Review> reviews;

  std::size_t size() const { return reviews.size(); }
};

struct LabelDistribution {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t unlabeled = 0;
};

/// Validates one review the way ingestion does (nonempty text, two-letter
/// lowercase lang, known label). Throws ValidationError.
void validate_review(const Review& r);

/// Loads a JSONL dataset: one object per line with keys id, text, label
/// ("pos" | "neg" | null), lang, domain. Dataset name is the file stem.
/// Errors carry the offending line number.
LabeledDataset load_jsonl(const std::string& path);

/// Writes the dataset back in the canonical JSONL schema.
void save_jsonl(const LabeledDataset& ds, const std::string& path);

LabelDistribution label_distribution(const LabeledDataset& ds);

/// Concatenates datasets in order. An id already present in the merged set
/// is disambiguated by prefixing "<dataset name>/"; if the prefixed id still
/// collides the merge fails.
LabeledDataset merge(const std::vector<LabeledDataset>& datasets);

} // namespace mlsa

#endif
