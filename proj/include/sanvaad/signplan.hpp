#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include <json.hpp>

namespace sanvaad {

/// Lowercases ASCII letters, deletes ASCII punctuation, splits on
/// whitespace. Non-ASCII bytes are kept, so Devanagari words survive.
std::vector<std::string> tokenize_text(std::string_view raw);

class PhraseDictionary {
 public:
  static const std::vector<std::string>& default_stop_keywords();

  PhraseDictionary();

  /// Applies the synonym map to an already tokenized sequence.
  std::vector<std::string> canonicalize(std::vector<std::string> tokens) const;
  /// tokenize_text followed by canonicalize.
  std::vector<std::string> normalize(std::string_view raw) const;

  /// The phrase is normalized before insertion. Throws duplicate_phrase when
  /// the normalized form already exists, invalid_argument for an empty
  /// phrase or asset id, or a phrase containing a stop keyword.
  void add_phrase(std::string_view phrase, std::string asset_id);
  /// Synonyms must be added before the phrases that rely on them.
  void add_synonym(std::string_view token, std::string_view canonical);
  void set_stop_keywords(const std::vector<std::string>& keywords);

  const std::string* find(std::string_view normalized_phrase) const;
  bool is_stop_keyword(std::string_view token) const;

  std::size_t size() const noexcept { return phrases_.size(); }
  std::size_t longest_phrase() const noexcept { return longest_; }
  /// Normalized phrases in insertion order.
  const std::vector<std::string>& phrases() const noexcept { return order_; }
  const std::unordered_set<std::string>& stop_keywords() const noexcept { return stop_; }

 private:
  std::unordered_map<std::string, std::string> phrases_;
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::vector<std::string>> synonyms_;
  std::unordered_set<std::string> stop_;
  std::size_t longest_ = 0;
};

/// Manifest: {"phrases": {phrase: asset}, "synonyms": {token: canonical},
/// "stop_keywords": [...]}. Missing stop_keywords keeps the defaults.
PhraseDictionary dictionary_from_json(const nlohmann::json& manifest);
PhraseDictionary load_dictionary(const std::filesystem::path& path);

/// Free-function form of PhraseDictionary::normalize.
std::vector<std::string> normalize_text(std::string_view raw, const PhraseDictionary& dict);

inline constexpr double kLetterSeconds = 1.0;

struct GifItem {
  std::string asset_id;
  std::string source_phrase;
  friend bool operator==(const GifItem&, const GifItem&) = default;
};

struct LetterItem {
  char symbol = 'A';  // 'A'..'Z' or '1'..'9'
  double duration = kLetterSeconds;
  std::string source_token;
  friend bool operator==(const LetterItem&, const LetterItem&) = default;
};

using SignItem = std::variant<GifItem, LetterItem>;

struct SignPlan {
  std::vector<SignItem> items;
  bool terminal = false;          // a stop keyword cut the utterance
  std::vector<std::string> tokens;  // normalized tokens that were planned
  std::vector<std::string> warnings;  // strict mode only

  std::size_t gif_count() const;
  std::size_t letter_count() const;
  double letter_seconds() const;
  friend bool operator==(const SignPlan&, const SignPlan&) = default;
};

struct TranslateOptions {
  bool strict = false;
};

/// Greedy longest phrase match at token granularity; unmatched tokens are
/// spelled letter by letter. Total and deterministic.
SignPlan translate(std::string_view raw, const PhraseDictionary& dict, const TranslateOptions& options = {});

nlohmann::json plan_to_json(const SignPlan& plan);

/// Speech-to-text boundary. The shipped implementation treats its input as
/// already transcribed text.
class Transcriber {
 public:
  virtual ~Transcriber() = default;
  virtual std::string transcribe(std::string_view input) const = 0;
};

class TextPassthroughTranscriber final : public Transcriber {
 public:
  std::string transcribe(std::string_view input) const override { return std::string(input); }
};

}  // namespace sanvaad
