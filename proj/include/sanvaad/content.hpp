#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sanvaad {

enum class Language { english, hindi, marathi };

inline constexpr std::array<Language, 3> kLanguages{Language::english, Language::hindi, Language::marathi};

std::string_view to_string(Language lang) noexcept;
/// Store file name inside a store directory, e.g. "hindi_news.json".
std::string_view store_file_name(Language lang) noexcept;

/// Trimmed, case-insensitive match on names, ISO codes and native names.
std::optional<Language> match_language(std::string_view text);
/// match_language, defaulting to English.
Language resolve_language(std::string_view text);

struct Article {
  std::string title;
  std::string content;
  std::chrono::year_month_day date;
  friend bool operator==(const Article&, const Article&) = default;
};

/// Strict YYYY-MM-DD; throws Error(parse) otherwise.
std::chrono::year_month_day parse_iso_date(std::string_view text);
std::string format_iso_date(std::chrono::year_month_day date);

/// One language's articles keyed by lowercase topic.
class NewsStore {
 public:
  NewsStore() = default;
  /// {"topics": {topic: [{"title","content","date"}]}}; errors name `origin`.
  static NewsStore from_json(const nlohmann::json& doc, const std::string& origin = "news store");
  static NewsStore load(const std::filesystem::path& path);

  void add(std::string_view topic, Article article);
  const std::vector<Article>* topic(std::string_view name) const;
  std::vector<std::string> topics() const;
  std::size_t article_count() const;

 private:
  std::map<std::string, std::vector<Article>> topics_;
};

inline constexpr std::size_t kMaxArticles = 3;

/// Articles under `topic`, date descending, ties by title then content,
/// at most `limit`.
std::vector<Article> select_articles(const NewsStore& store, std::string_view topic, std::size_t limit = kMaxArticles);

enum class ContentStatus { ok, no_content, unavailable };
std::string_view to_string(ContentStatus status) noexcept;

struct ContentRequest {
  std::string raw_language;
  Language language = Language::english;
  std::string topic;
};

ContentRequest make_request(std::string_view language, std::string_view topic);

/// The per-language stores found in one directory. Absent files are simply
/// not loaded; malformed files throw.
class NewsLibrary {
 public:
  NewsLibrary() = default;
  static NewsLibrary load_directory(const std::filesystem::path& dir);

  void set(Language lang, NewsStore store);
  const NewsStore* store(Language lang) const;

 private:
  std::array<std::optional<NewsStore>, kLanguages.size()> stores_;
};

struct FetchResult {
  std::vector<Article> articles;
  ContentStatus status = ContentStatus::ok;
  Language served_language = Language::english;
  bool language_fallback = false;  // requested store missing, English served
};

/// Falls back to the English store when the requested language has none.
FetchResult fetch_articles(const NewsLibrary& library, const ContentRequest& request);

/// Words are maximal runs of non-whitespace bytes.
std::vector<std::string> split_words(std::string_view text);
std::size_t word_count(std::string_view text);
/// Splits after '.', '!', '?', U+0964 and U+0965 when followed by whitespace
/// or the end; the pieces are trimmed and keep their terminators.
std::vector<std::string> split_sentences(std::string_view text);

inline constexpr std::size_t kSummaryMinWords = 20;
inline constexpr std::size_t kSummaryMaxWords = 60;

class Summarizer {
 public:
  virtual ~Summarizer() = default;
  /// Contract: word count in [min_words, max_words] unless the input has
  /// fewer than min_words, in which case the input is returned unchanged.
  virtual std::string summarize(std::string_view text, std::size_t min_words, std::size_t max_words) const = 0;
};

/// Whole leading sentences until min_words is reached, then cut to
/// max_words on a word boundary.
class ExtractiveSummarizer final : public Summarizer {
 public:
  std::string summarize(std::string_view text, std::size_t min_words, std::size_t max_words) const override;
};

std::string summarize(std::string_view text, std::size_t min_words = kSummaryMinWords,
                      std::size_t max_words = kSummaryMaxWords, const Summarizer* summarizer = nullptr);

inline constexpr double kWordsPerMinute = 150.0;
inline constexpr double kPauseSeconds = 0.5;

struct SpeechSegment {
  std::string text;
  std::size_t words = 0;
  double duration_seconds = 0.0;  // words / 150 minutes
  double pause_after_seconds = kPauseSeconds;
};

struct SpeechPlan {
  Language language = Language::english;
  std::vector<SpeechSegment> segments;

  double speaking_seconds() const;
  double total_seconds() const;  // speaking plus pauses
};

/// One segment per sentence of `summary`.
SpeechPlan build_speech_plan(std::string_view summary, Language language);

/// Audio synthesis boundary. Implementations consume a plan; the shipped
/// one produces no audio and reports the plan's timing.
class SpeechSynthesizer {
 public:
  virtual ~SpeechSynthesizer() = default;
  /// Returns the seconds of audio produced.
  virtual double synthesize(const SpeechPlan& plan) = 0;
};

class SilentSynthesizer final : public SpeechSynthesizer {
 public:
  double synthesize(const SpeechPlan& plan) override { return plan.total_seconds(); }
};

struct ContentEntry {
  Article article;
  std::string summary;
  SpeechPlan speech;
};

struct ContentBundle {
  ContentRequest request;
  ContentStatus status = ContentStatus::ok;
  Language served_language = Language::english;
  bool language_fallback = false;
  std::vector<ContentEntry> entries;
};

ContentBundle build_bundle(const NewsLibrary& library, const ContentRequest& request,
                           const Summarizer* summarizer = nullptr);

nlohmann::json speech_plan_to_json(const SpeechPlan& plan);
nlohmann::json bundle_to_json(const ContentBundle& bundle);

}  // namespace sanvaad
