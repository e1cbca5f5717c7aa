#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "holo/datakit/dataset.hpp"
#include "holo/numerics/rng.hpp"

namespace holo {

inline constexpr const char* kCaptionQuestion = "Please give detailed descriptions of human's action.";
inline constexpr std::size_t kQuestionBankSize = 15;

/// Questions used to build Action QA samples.
class QuestionBank {
 public:
  /// The shipped bank: two seed-style questions plus thirteen paraphrases.
  static QuestionBank builtin();
  /// One question per line; must hold exactly 15 unique non-empty lines.
  static QuestionBank load(const std::filesystem::path& path);
  explicit QuestionBank(std::vector<std::string> questions);

  const std::vector<std::string>& questions() const { return questions_; }
  std::size_t size() const { return questions_.size(); }
  const std::string& draw(Rng& rng) const { return questions_[rng.uniform_index(questions_.size())]; }

 private:
  std::vector<std::string> questions_;
};

struct QASample {
  std::string id;
  ModalityKind modality = ModalityKind::Video;
  std::string question;
  std::vector<std::string> action_list;
  std::string answer;

  bool operator==(const QASample&) const = default;
};

struct CaptionSample {
  std::string id;
  std::string question;
  std::string caption;

  bool operator==(const CaptionSample&) const = default;
};

/// One in-context captioning exemplar: the fixed question, a video reference
/// and its caption.
struct InContextSample {
  std::string id;
  std::string question;
  std::string video;
  std::string caption;

  bool operator==(const InContextSample&) const = default;
};

using CaptionSource = std::map<std::string, std::string>;  // sequence id -> caption

/// Question drawn uniformly from `bank`; the option list is every category in
/// canonical order. Throws ManifestError when the record's label is unknown.
QASample make_qa_sample(const SequenceRecord& seq, const DatasetSpec& spec, ModalityKind modality,
                        const QuestionBank& bank, Rng& rng);

/// Throws CurationError naming the sequence when no caption is available.
CaptionSample make_caption_sample(const SequenceRecord& seq, const CaptionSource& captions);

/// Deterministic caption template of (action, subject archetype).
std::string synthetic_caption(const DatasetSpec& spec, const SequenceRecord& seq);
CaptionSource synthetic_captions(const Manifest& manifest);

/// Up to `per_class` exemplars per category, rotating through environments and
/// subjects, each paired with its caption and video payload path.
std::vector<InContextSample> select_in_context(const Manifest& manifest, const CaptionSource& captions,
                                               std::size_t per_class);

/// Decoder-side text: question, then "options :" and the comma-separated list.
std::string qa_prompt_text(const QASample& s);

nlohmann::json to_json(const QASample& s);
nlohmann::json to_json(const CaptionSample& s);
nlohmann::json to_json(const InContextSample& s);
QASample qa_from_json(const nlohmann::json& j);
CaptionSample caption_from_json(const nlohmann::json& j);
InContextSample in_context_from_json(const nlohmann::json& j);

/// One compact JSON object per line. Readers throw CurationError on bad lines.
void write_jsonl(const std::vector<nlohmann::json>& rows, const std::filesystem::path& path);
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

}  // namespace holo
