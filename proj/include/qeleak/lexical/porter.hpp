#pragma once

// Porter (1980) suffix-stripping stemmer, following the reference ANSI C
// implementation (including its "bli"/"logi" step-2 rules). Operates on
// lowercase ASCII; tokens containing other bytes are returned unchanged.

#include <string>
#include <string_view>

namespace qeleak::lexical {

class PorterStemmer {
 public:
  std::string stem(std::string_view word) {
    for (char ch : word)
      if (ch < 'a' || ch > 'z') return std::string(word);
    b_.assign(word);
    if (b_.size() <= 2) return b_;
    k_ = static_cast<int>(b_.size()) - 1;
    step1ab();
    if (k_ > 0) {
      step1c();
      step2();
      step3();
      step4();
      step5();
    }
    return b_.substr(0, static_cast<size_t>(k_) + 1);
  }

 private:
  bool cons(int i) const {
    switch (b_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b[0..j].
  int m() const {
    int n = 0, i = 0;
    for (;;) {
      if (i > j_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    for (;;) {
      for (;;) {
        if (i > j_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      for (;;) {
        if (i > j_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j_; ++i)
      if (!cons(i)) return true;
    return false;
  }

  bool double_c(int j) const { return j >= 1 && b_[j] == b_[j - 1] && cons(j); }

  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    char ch = b_[i];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends(std::string_view s) {
    int len = static_cast<int>(s.size());
    if (len > k_ + 1) return false;
    if (std::string_view(b_).substr(static_cast<size_t>(k_ - len + 1), s.size()) != s) return false;
    j_ = k_ - len;
    return true;
  }

  void set_to(std::string_view s) {
    b_.resize(static_cast<size_t>(j_) + 1);
    b_ += s;
    k_ = j_ + static_cast<int>(s.size());
  }

  void r(std::string_view s) {
    if (m() > 0) set_to(s);
  }

  // Keeps b_ sized to k_+1 so set_to can append.
  void trim() { b_.resize(static_cast<size_t>(k_) + 1); }

  void step1ab() {
    if (b_[k_] == 's') {
      if (ends("sses")) k_ -= 2;
      else if (ends("ies")) set_to("i");
      else if (b_[k_ - 1] != 's') --k_;
    }
    trim();
    if (ends("eed")) {
      if (m() > 0) --k_;
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      k_ = j_;
      trim();
      if (ends("at")) set_to("ate");
      else if (ends("bl")) set_to("ble");
      else if (ends("iz")) set_to("ize");
      else if (double_c(k_)) {
        --k_;
        char ch = b_[k_];
        if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
      } else {
        j_ = k_;
        if (m() == 1 && cvc(k_)) set_to("e");
      }
    }
    trim();
  }

  void step1c() {
    if (ends("y") && vowel_in_stem()) b_[k_] = 'i';
  }

  bool rule(std::string_view suffix, std::string_view repl) {
    if (!ends(suffix)) return false;
    r(repl);
    return true;
  }

  void step2() {
    switch (b_[k_ - 1]) {
      case 'a':
        rule("ational", "ate") || rule("tional", "tion");
        break;
      case 'c':
        rule("enci", "ence") || rule("anci", "ance");
        break;
      case 'e':
        rule("izer", "ize");
        break;
      case 'l':
        rule("bli", "ble") || rule("alli", "al") || rule("entli", "ent") || rule("eli", "e") || rule("ousli", "ous");
        break;
      case 'o':
        rule("ization", "ize") || rule("ation", "ate") || rule("ator", "ate");
        break;
      case 's':
        rule("alism", "al") || rule("iveness", "ive") || rule("fulness", "ful") || rule("ousness", "ous");
        break;
      case 't':
        rule("aliti", "al") || rule("iviti", "ive") || rule("biliti", "ble");
        break;
      case 'g':
        rule("logi", "log");
        break;
      default:
        break;
    }
    trim();
  }

  void step3() {
    switch (b_[k_]) {
      case 'e':
        rule("icate", "ic") || rule("ative", "") || rule("alize", "al");
        break;
      case 'i':
        rule("iciti", "ic");
        break;
      case 'l':
        rule("ical", "ic") || rule("ful", "");
        break;
      case 's':
        rule("ness", "");
        break;
      default:
        break;
    }
    trim();
  }

  void step4() {
    switch (b_[k_ - 1]) {
      case 'a':
        if (ends("al")) break;
        return;
      case 'c':
        if (ends("ance") || ends("ence")) break;
        return;
      case 'e':
        if (ends("er")) break;
        return;
      case 'i':
        if (ends("ic")) break;
        return;
      case 'l':
        if (ends("able") || ends("ible")) break;
        return;
      case 'n':
        if (ends("ant") || ends("ement") || ends("ment") || ends("ent")) break;
        return;
      case 'o':
        if (ends("ion") && j_ >= 0 && (b_[j_] == 's' || b_[j_] == 't')) break;
        if (ends("ou")) break;
        return;
      case 's':
        if (ends("ism")) break;
        return;
      case 't':
        if (ends("ate") || ends("iti")) break;
        return;
      case 'u':
        if (ends("ous")) break;
        return;
      case 'v':
        if (ends("ive")) break;
        return;
      case 'z':
        if (ends("ize")) break;
        return;
      default:
        return;
    }
    if (m() > 1) {
      k_ = j_;
      trim();
    }
  }

  void step5() {
    j_ = k_;
    if (b_[k_] == 'e') {
      int a = m();
      if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
    }
    if (b_[k_] == 'l' && double_c(k_) && m() > 1) --k_;
    trim();
  }

  std::string b_;
  int k_ = 0;
  int j_ = 0;
};

inline std::string porter_stem(std::string_view word) {
  thread_local PorterStemmer stemmer;
  return stemmer.stem(word);
}

}  // namespace qeleak::lexical
