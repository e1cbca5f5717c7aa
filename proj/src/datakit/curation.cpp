#include "holo/datakit/curation.hpp"

#include <fstream>
#include <set>

#include "holo/errors.hpp"

namespace holo {

using nlohmann::json;

QuestionBank::QuestionBank(std::vector<std::string> questions) : questions_(std::move(questions)) {
  if (questions_.size() != kQuestionBankSize) {
    throw CurationError("question bank must hold " + std::to_string(kQuestionBankSize) + " questions, got " +
                        std::to_string(questions_.size()));
  }
  std::set<std::string> seen;
  for (const auto& q : questions_) {
    if (q.empty()) throw CurationError("question bank contains an empty question");
    if (!seen.insert(q).second) throw CurationError("duplicate question in bank: " + q);
  }
}

QuestionBank QuestionBank::builtin() {
  return QuestionBank({
      // seed-style
      "What action is the person performing? Choose one option from the action list.",
      "Which of the listed actions best matches what the human is doing?",
      // paraphrases
      "Based on the sensor data, which action from the list is the person doing?",
      "Select the action from the list that the human is carrying out.",
      "Identify the activity of the person and pick one of the given actions.",
      "Looking at the input, what is the human doing? Answer with one listed action.",
      "From the options below, which action does the subject perform?",
      "What is the person in this recording doing? Pick the matching action.",
      "Choose the action that describes the human's movement in this sample.",
      "Which listed activity is being performed in the captured sequence?",
      "Tell me which action the person performs, using one of the options.",
      "Among the actions listed, which one is the human engaged in?",
      "What movement is the subject making? Select it from the action list.",
      "Determine the human's action and answer with one option from the list.",
      "Which action from the provided list fits the person's behavior?",
  });
}

QuestionBank QuestionBank::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read question bank " + path.string());
  std::vector<std::string> qs;
  for (std::string line; std::getline(f, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) qs.push_back(line);
  }
  return QuestionBank(std::move(qs));
}

QASample make_qa_sample(const SequenceRecord& seq, const DatasetSpec& spec, ModalityKind modality,
                        const QuestionBank& bank, Rng& rng) {
  if (seq.action >= spec.class_names.size()) {
    throw ManifestError("sequence " + seq.id + " has label " + std::to_string(seq.action) + " outside " +
                        std::to_string(spec.class_names.size()) + " categories");
  }
  return {seq.id, modality, bank.draw(rng), spec.class_names, spec.class_names[seq.action]};
}

CaptionSample make_caption_sample(const SequenceRecord& seq, const CaptionSource& captions) {
  auto it = captions.find(seq.id);
  if (it == captions.end() || it->second.empty()) throw CurationError("no caption for sequence " + seq.id);
  return {seq.id, kCaptionQuestion, it->second};
}

namespace {
const char* kArchetypes[] = {"a tall man", "a young woman", "an older man", "a short woman"};
const char* kManner[] = {"with steady and controlled movements", "at a relaxed pace", "with careful balance",
                         "with quick and energetic motions"};
}  // namespace

std::string synthetic_caption(const DatasetSpec& spec, const SequenceRecord& seq) {
  const std::size_t a = seq.subject % 4;
  return std::string("The person is ") + kArchetypes[a] + " who is " + spec.class_names.at(seq.action) + " " +
         kManner[a] + ".";
}

CaptionSource synthetic_captions(const Manifest& manifest) {
  CaptionSource out;
  for (const auto& r : manifest.records) out.emplace(r.id, synthetic_caption(manifest.spec, r));
  return out;
}

std::vector<InContextSample> select_in_context(const Manifest& manifest, const CaptionSource& captions,
                                               std::size_t per_class) {
  const auto& spec = manifest.spec;
  std::vector<InContextSample> out;
  std::set<std::string> used;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t k = 0; k < per_class; ++k) {
      // Prefer environment (c + k) mod E and subject rotation, falling back to any unused record of the class.
      const std::size_t want_env = (c + k) % spec.num_envs;
      const SequenceRecord* pick = nullptr;
      for (int pass = 0; pass < 2 && !pick; ++pass) {
        for (const auto& r : manifest.records) {
          if (r.action != c || used.count(r.id)) continue;
          if (pass == 0 && r.env != want_env) continue;
          pick = &r;
          break;
        }
      }
      if (!pick) break;
      used.insert(pick->id);
      auto video = pick->payloads.count(ModalityKind::Video) ? pick->payloads.at(ModalityKind::Video) : std::string();
      out.push_back({pick->id, kCaptionQuestion, video, make_caption_sample(*pick, captions).caption});
    }
  }
  return out;
}

std::string qa_prompt_text(const QASample& s) {
  std::string out = s.question + " options :";
  for (std::size_t i = 0; i < s.action_list.size(); ++i) out += (i ? " , " : " ") + s.action_list[i];
  return out;
}

json to_json(const QASample& s) {
  return {{"id", s.id},
          {"modality", std::string(to_string(s.modality))},
          {"question", s.question},
          {"action_list", s.action_list},
          {"answer", s.answer}};
}

json to_json(const CaptionSample& s) { return {{"id", s.id}, {"question", s.question}, {"caption", s.caption}}; }

json to_json(const InContextSample& s) {
  return {{"id", s.id}, {"question", s.question}, {"video", s.video}, {"caption", s.caption}};
}

QASample qa_from_json(const json& j) {
  try {
    QASample s{j.at("id").get<std::string>(), modality_from_string(j.at("modality").get<std::string>()),
               j.at("question").get<std::string>(), j.at("action_list").get<std::vector<std::string>>(),
               j.at("answer").get<std::string>()};
    if (std::find(s.action_list.begin(), s.action_list.end(), s.answer) == s.action_list.end()) {
      throw CurationError("QA sample " + s.id + ": answer not in action list");
    }
    return s;
  } catch (const json::exception& e) {
    throw CurationError(std::string("malformed QA sample: ") + e.what());
  }
}

CaptionSample caption_from_json(const json& j) {
  try {
    CaptionSample s{j.at("id").get<std::string>(), j.at("question").get<std::string>(),
                    j.at("caption").get<std::string>()};
    if (s.question != kCaptionQuestion) throw CurationError("caption sample " + s.id + ": unexpected question");
    return s;
  } catch (const json::exception& e) {
    throw CurationError(std::string("malformed caption sample: ") + e.what());
  }
}

InContextSample in_context_from_json(const json& j) {
  try {
    return {j.at("id").get<std::string>(), j.at("question").get<std::string>(), j.at("video").get<std::string>(),
            j.at("caption").get<std::string>()};
  } catch (const json::exception& e) {
    throw CurationError(std::string("malformed in-context sample: ") + e.what());
  }
}

void write_jsonl(const std::vector<json>& rows, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  for (const auto& r : rows) f << r.dump() << '\n';
  if (!f) throw IoError("failed writing " + path.string());
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::vector<json> rows;
  std::size_t lineno = 0;
  for (std::string line; std::getline(f, line);) {
    ++lineno;
    if (line.empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw CurationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace holo
