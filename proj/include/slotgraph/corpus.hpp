#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace slotgraph::corpus {

enum class Bio : std::uint8_t { O = 0, B = 1, I = 2 };

char bio_char(Bio b);

struct Utterance {
  std::vector<std::string> tokens;
  int id = 0;
};

/// Typed span with 1-based inclusive bounds, type as a vocabulary id.
struct Span {
  int l = 0;
  int r = 0;
  int type = 0;
  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
};

/// Same span shape but carrying the type name, for vocabulary-free use.
struct NamedSpan {
  int l = 0;
  int r = 0;
  std::string type;
  bool operator==(const NamedSpan&) const = default;
};

struct SlotAnnotation {
  std::vector<Bio> bio;
  std::vector<Span> spans;
};

struct IntentLabel {
  int intent = 0;
};

struct LabelVocab {
  std::vector<std::string> intent_names;
  std::vector<std::string> slot_type_names;
  std::map<std::string, std::string> descriptions;

  int intent_id(const std::string& name) const;  // -1 when absent
  int slot_type_id(const std::string& name) const;
  /// Stored description, or the default wording when none was given.
  std::string description(const std::string& name) const;
};

struct Sample {
  Utterance utterance;
  SlotAnnotation slots;
  IntentLabel intent;
};

struct Dataset {
  std::vector<Sample> samples;
  std::string split;
};

// ---- errors -------------------------------------------------------------

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LengthMismatch : CorpusError {
  int line;
  explicit LengthMismatch(int ln)
      : CorpusError("token/tag count mismatch at line " + std::to_string(ln)),
        line(ln) {}
};
struct UnknownLabel : CorpusError {
  std::string name;
  explicit UnknownLabel(std::string n)
      : CorpusError("unknown label: " + n), name(std::move(n)) {}
};
struct MalformedTag : CorpusError {
  std::string tag;
  explicit MalformedTag(std::string t)
      : CorpusError("malformed tag: " + t), tag(std::move(t)) {}
};
struct DanglingI : CorpusError {
  int index;
  explicit DanglingI(int i)
      : CorpusError("I tag without predecessor at position " + std::to_string(i)),
        index(i) {}
};
struct TypeSwitch : CorpusError {
  int index;
  explicit TypeSwitch(int i)
      : CorpusError("I tag switches type at position " + std::to_string(i)),
        index(i) {}
};
struct OverlapError : CorpusError {
  OverlapError() : CorpusError("overlapping spans") {}
};
struct OutOfRange : CorpusError {
  OutOfRange() : CorpusError("span index out of range") {}
};

// ---- operations ---------------------------------------------------------

/// Splits typed BIO tags ("O", "B-x", "I-x") into a plain BIO sequence and
/// the list of typed spans. Strict mode rejects dangling or type-switching
/// I tags; lenient mode promotes them to B.
std::pair<std::vector<Bio>, std::vector<NamedSpan>> reformulate(
    const std::vector<std::string>& tags, bool lenient = false);

/// Inverse direction: paints spans onto a length-n plain BIO sequence.
/// Span types are ignored; only the (l, r) geometry matters.
std::vector<Bio> spans_to_bio(const std::vector<Span>& spans, int n);

/// Default description for a label name: underscores and dots become spaces.
std::string default_description(const std::string& name);

/// Loads a split directory (seq.in / seq.out / label). With a vocab the
/// labels must already be known; without one the vocab is built from the
/// data in first-occurrence order. An optional descriptions.tsv next to the
/// split overrides default label descriptions.
std::pair<Dataset, LabelVocab> load_split(
    const std::filesystem::path& dir,
    const std::optional<LabelVocab>& vocab = std::nullopt,
    bool lenient = false);

/// Reads label<TAB>description lines into vocab.descriptions.
void apply_descriptions_tsv(LabelVocab& vocab, const std::filesystem::path& tsv);

std::vector<std::string> split_ws(const std::string& line);

}  // namespace slotgraph::corpus
