#include "slotgraph/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace slotgraph::corpus {

char bio_char(Bio b) {
  switch (b) {
    case Bio::O: return 'O';
    case Bio::B: return 'B';
    case Bio::I: return 'I';
  }
  return '?';
}

int LabelVocab::intent_id(const std::string& name) const {
  auto it = std::find(intent_names.begin(), intent_names.end(), name);
  return it == intent_names.end()
             ? -1
             : static_cast<int>(it - intent_names.begin());
}

int LabelVocab::slot_type_id(const std::string& name) const {
  auto it = std::find(slot_type_names.begin(), slot_type_names.end(), name);
  return it == slot_type_names.end()
             ? -1
             : static_cast<int>(it - slot_type_names.begin());
}

std::string LabelVocab::description(const std::string& name) const {
  auto it = descriptions.find(name);
  return it != descriptions.end() ? it->second : default_description(name);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::string default_description(const std::string& name) {
  std::string d = name;
  for (char& c : d) {
    if (c == '_' || c == '.') c = ' ';
  }
  return d;
}

std::pair<std::vector<Bio>, std::vector<NamedSpan>> reformulate(
    const std::vector<std::string>& tags, bool lenient) {
  std::vector<Bio> bio;
  std::vector<NamedSpan> spans;
  bio.reserve(tags.size());

  auto open_span = [&](int pos, const std::string& type) {
    spans.push_back(NamedSpan{pos, pos, type});
    bio.push_back(Bio::B);
  };

  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& tag = tags[i];
    int pos = static_cast<int>(i) + 1;
    if (tag == "O") {
      bio.push_back(Bio::O);
      continue;
    }
    if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I')) {
      throw MalformedTag(tag);
    }
    std::string type = tag.substr(2);
    if (tag[0] == 'B') {
      open_span(pos, type);
      continue;
    }
    // I-x: must continue an open span of the same type
    bool open = !bio.empty() && bio.back() != Bio::O && !spans.empty() &&
                spans.back().r == pos - 1;
    if (!open) {
      if (!lenient) throw DanglingI(pos);
      open_span(pos, type);
      continue;
    }
    if (spans.back().type != type) {
      if (!lenient) throw TypeSwitch(pos);
      open_span(pos, type);
      continue;
    }
    spans.back().r = pos;
    bio.push_back(Bio::I);
  }
  return {std::move(bio), std::move(spans)};
}

std::vector<Bio> spans_to_bio(const std::vector<Span>& spans, int n) {
  std::vector<Bio> bio(static_cast<std::size_t>(n), Bio::O);
  for (const Span& s : spans) {
    if (s.l < 1 || s.r < s.l || s.r > n) throw OutOfRange();
    for (int p = s.l; p <= s.r; ++p) {
      if (bio[p - 1] != Bio::O) throw OverlapError();
      bio[p - 1] = p == s.l ? Bio::B : Bio::I;
    }
  }
  return bio;
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw CorpusError("cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // ignore a single trailing blank line
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::pair<Dataset, LabelVocab> load_split(
    const std::filesystem::path& dir,
    const std::optional<LabelVocab>& vocab,
    bool lenient) {
  auto tokens_lines = read_lines(dir / "seq.in");
  auto tags_lines = read_lines(dir / "seq.out");
  auto label_lines = read_lines(dir / "label");
  if (tokens_lines.size() != tags_lines.size() ||
      tokens_lines.size() != label_lines.size()) {
    throw CorpusError("split files in " + dir.string() +
                      " have different line counts");
  }

  LabelVocab out_vocab = vocab.value_or(LabelVocab{});
  const bool building = !vocab.has_value();

  auto intent_of = [&](const std::string& name) {
    int id = out_vocab.intent_id(name);
    if (id < 0) {
      if (!building) throw UnknownLabel(name);
      out_vocab.intent_names.push_back(name);
      id = static_cast<int>(out_vocab.intent_names.size()) - 1;
    }
    return id;
  };
  auto slot_type_of = [&](const std::string& name) {
    int id = out_vocab.slot_type_id(name);
    if (id < 0) {
      if (!building) throw UnknownLabel(name);
      out_vocab.slot_type_names.push_back(name);
      id = static_cast<int>(out_vocab.slot_type_names.size()) - 1;
    }
    return id;
  };

  Dataset ds;
  ds.split = dir.filename().string();
  for (std::size_t i = 0; i < tokens_lines.size(); ++i) {
    int line_no = static_cast<int>(i) + 1;
    Sample s;
    s.utterance.tokens = split_ws(tokens_lines[i]);
    s.utterance.id = static_cast<int>(i);
    if (s.utterance.tokens.empty()) {
      throw CorpusError("empty utterance at line " + std::to_string(line_no));
    }
    auto tags = split_ws(tags_lines[i]);
    if (tags.size() != s.utterance.tokens.size()) throw LengthMismatch(line_no);

    auto [bio, named] = reformulate(tags, lenient);
    s.slots.bio = std::move(bio);
    for (const NamedSpan& ns : named) {
      s.slots.spans.push_back(Span{ns.l, ns.r, slot_type_of(ns.type)});
    }
    s.intent.intent = intent_of(label_lines[i]);
    ds.samples.push_back(std::move(s));
  }

  if (building) {
    for (const auto& name : out_vocab.intent_names) {
      if (!out_vocab.descriptions.count(name)) {
        out_vocab.descriptions[name] = default_description(name);
      }
    }
    for (const auto& name : out_vocab.slot_type_names) {
      if (!out_vocab.descriptions.count(name)) {
        out_vocab.descriptions[name] = default_description(name);
      }
    }
    auto tsv = dir / "descriptions.tsv";
    if (std::filesystem::exists(tsv)) apply_descriptions_tsv(out_vocab, tsv);
  }
  return {std::move(ds), std::move(out_vocab)};
}

void apply_descriptions_tsv(LabelVocab& vocab,
                            const std::filesystem::path& tsv) {
  for (const std::string& line : read_lines(tsv)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw CorpusError("descriptions.tsv line without tab: " + line);
    }
    vocab.descriptions[line.substr(0, tab)] = line.substr(tab + 1);
  }
}

}  // namespace slotgraph::corpus
