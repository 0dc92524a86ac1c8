#include <cctype>
#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "pairmix/data.hpp"

namespace pairmix {

namespace {

enum class TokenKind { kName, kNumber, kPlus, kTilde, kBar, kEnd };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t offset;
};

const char* describe(TokenKind kind) {
  switch (kind) {
    case TokenKind::kName: return "name";
    case TokenKind::kNumber: return "number";
    case TokenKind::kPlus: return "'+'";
    case TokenKind::kTilde: return "'~'";
    case TokenKind::kBar: return "'|'";
    case TokenKind::kEnd: return "end of formula";
  }
  return "token";
}

bool name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    const std::size_t at = pos_;
    if (pos_ >= text_.size()) return {TokenKind::kEnd, "", at};
    const char c = text_[pos_];
    if (c == '+') { ++pos_; return {TokenKind::kPlus, "+", at}; }
    if (c == '~') { ++pos_; return {TokenKind::kTilde, "~", at}; }
    if (c == '|') { ++pos_; return {TokenKind::kBar, "|", at}; }
    if (name_start(c)) {
      std::size_t end = pos_ + 1;
      while (end < text_.size() && name_char(text_[end])) ++end;
      Token t{TokenKind::kName, text_.substr(pos_, end - pos_), at};
      pos_ = end;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t end = pos_ + 1;
      while (end < text_.size() && name_char(text_[end])) ++end;
      Token t{TokenKind::kNumber, text_.substr(pos_, end - pos_), at};
      pos_ = end;
      return t;
    }
    throw FormulaError("unexpected character '" + std::string(1, c) +
                           "' at offset " + std::to_string(at),
                       at);
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lexer_(text) { advance(); }

  FormulaSpec parse() {
    FormulaSpec spec;
    parse_name_list(&spec.responses, "response");
    expect(TokenKind::kTilde, "'~'");
    parse_rhs(&spec);
    expect(TokenKind::kEnd, "end of formula");
    check_disjoint(spec);
    return spec;
  }

 private:
  void advance() { current_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& expected) {
    throw FormulaError("expected " + expected + " at offset " +
                           std::to_string(current_.offset) + ", found " +
                           describe(current_.kind),
                       current_.offset);
  }

  void expect(TokenKind kind, const std::string& expected) {
    if (current_.kind != kind) fail(expected);
    advance();
  }

  std::string take_name(const char* role) {
    if (current_.kind != TokenKind::kName) {
      fail(std::string(role) + " name");
    }
    std::string name = current_.text;
    const std::size_t at = current_.offset;
    if (!seen_.insert(name).second) {
      throw FormulaError("duplicate name '" + name + "' at offset " +
                             std::to_string(at),
                         at);
    }
    advance();
    return name;
  }

  void parse_name_list(std::vector<std::string>* out, const char* role) {
    out->push_back(take_name(role));
    while (current_.kind == TokenKind::kPlus) {
      advance();
      out->push_back(take_name(role));
    }
  }

  void parse_rhs(FormulaSpec* spec) {
    if (current_.kind == TokenKind::kNumber) {
      if (current_.text == "0") {
        spec->intercept_suppressed = true;
        advance();
        if (current_.kind == TokenKind::kPlus) {
          advance();
          parse_name_list(&spec->covariates, "covariate");
        }
      } else if (current_.text == "1") {
        // Intercept-only right-hand side; the location parameters are free
        // regardless, so nothing else to record.
        advance();
      } else {
        fail("covariate name, '0' or '1'");
      }
    } else {
      parse_name_list(&spec->covariates, "covariate");
    }
    if (current_.kind == TokenKind::kBar) {
      // Trailing grouping marker "| 1": accepted and ignored.
      advance();
      if (current_.kind != TokenKind::kNumber || current_.text != "1") {
        fail("'1' after '|'");
      }
      advance();
    }
  }

  void check_disjoint(const FormulaSpec& spec) {
    // Duplicates across the two sides are already caught by seen_; this
    // hook remains for future cross-checks.
    (void)spec;
  }

  Lexer lexer_;
  Token current_;
  std::unordered_set<std::string> seen_;
};

}  // namespace

FormulaError::FormulaError(const std::string& what, std::size_t offset)
    : std::runtime_error(what), offset_(offset) {}

std::string FormulaSpec::text() const {
  std::string out;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (i) out += " + ";
    out += responses[i];
  }
  out += " ~ ";
  if (intercept_suppressed) out += covariates.empty() ? "0" : "0 + ";
  if (covariates.empty() && !intercept_suppressed) out += "1";
  for (std::size_t i = 0; i < covariates.size(); ++i) {
    if (i) out += " + ";
    out += covariates[i];
  }
  return out;
}

FormulaSpec parse_formula(const std::string& text) {
  return Parser(text).parse();
}

}  // namespace pairmix
