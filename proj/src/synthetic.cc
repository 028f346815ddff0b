#include "biparse/synthetic.h"

#include <map>
#include <random>

#include "biparse/common.h"

namespace biparse {

SyntheticLanguage synthetic_language(const std::string& code) {
  SyntheticLanguage l;
  l.code = code;
  if (code == "a1") {
    l.family = 11;
    l.variant = 1;
  } else if (code == "a2") {
    l.family = 11;
    l.variant = 2;
    l.adjective_first = true;
    l.object_case = true;
  } else if (code == "b1") {
    l.family = 23;
    l.variant = 3;
    l.order = WordOrder::SOV;
    l.adjective_first = true;
    l.prepositions = false;
    l.object_case = true;
  } else if (code == "b2") {
    l.family = 23;
    l.variant = 4;
    l.order = WordOrder::VSO;
    l.prepositions = false;
  } else {
    throw ConfigError("unknown synthetic language '" + code +
                      "' (known: a1 a2 b1 b2)");
  }
  return l;
}

namespace {

struct Entry {
  std::string stem;
  int cls = 0;            // noun class / verb transitivity / adposition set
};

struct Grammar {
  std::vector<Entry> nouns, verbs, adjectives, adverbs, adpositions, determiners;
  std::string relativizer;
  std::map<char, char> sound_changes;
  std::string plural, verb_suffix, agreement, object_suffix;
  SyntheticLanguage lang;
};

std::string syllables(std::mt19937_64& rng, int count) {
  static const std::string consonants = "ptkbdgmnlrsvz";
  static const std::string vowels = "aeiou";
  std::string s;
  for (int i = 0; i < count; ++i) {
    s += consonants[rng() % consonants.size()];
    s += vowels[rng() % vowels.size()];
  }
  if (rng() % 3 == 0) s += consonants[rng() % consonants.size()];
  return s;
}

std::vector<Entry> entries(std::mt19937_64& rng, std::size_t n, int min_syl,
                           int classes) {
  std::vector<Entry> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({syllables(rng, min_syl + static_cast<int>(rng() % 2)),
                   static_cast<int>(rng() % classes)});
  return out;
}

Grammar make_grammar(const SyntheticLanguage& lang) {
  Grammar g;
  g.lang = lang;
  std::mt19937_64 family(lang.family);
  g.nouns = entries(family, 120, 2, 4);
  g.verbs = entries(family, 60, 2, 2);  // 1 = transitive
  g.adjectives = entries(family, 40, 2, 1);
  g.adverbs = entries(family, 15, 3, 1);
  g.adpositions = entries(family, 8, 1, 4);  // verbal noun class
  g.determiners = entries(family, 4, 1, 1);
  g.relativizer = syllables(family, 1);

  std::mt19937_64 variant(lang.variant * 7919 + lang.family);
  static const std::string letters = "ptkbdgmnlrsvzaeiou";
  for (int i = 0; i < 4; ++i) {
    const char from = letters[variant() % letters.size()];
    const bool vowel = std::string("aeiou").find(from) != std::string::npos;
    const std::string pool = vowel ? "aeiouy" : "ptkbdgmnlrsvzfhc";
    g.sound_changes[from] = pool[variant() % pool.size()];
  }
  g.plural = syllables(variant, 1).substr(0, 2);
  g.verb_suffix = syllables(variant, 1).substr(0, 2);
  g.agreement = std::string(1, "nstr"[variant() % 4]);
  g.object_suffix = syllables(variant, 1).substr(0, 2);
  return g;
}

std::string surface(const Grammar& g, const std::string& stem) {
  std::string s = stem;
  for (char& c : s)
    if (auto it = g.sound_changes.find(c); it != g.sound_changes.end()) c = it->second;
  return s;
}

struct Node {
  std::string form, upos, label;
  std::vector<int> left, right;  // dependents in surface order
  bool extraposed = false;
};

class Builder {
 public:
  Builder(const Grammar& g, std::mt19937_64& rng) : g_(g), rng_(rng) {}

  std::vector<Node> nodes;

  int root_clause() {
    const int v = clause(0);
    nodes[v].label = "root";
    const int p = add(".", "PUNCT", "punct");
    nodes[v].right.push_back(p);
    return v;
  }

 private:
  bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[rng_() % v.size()]; }

  int add(std::string form, std::string upos, std::string label) {
    nodes.push_back({std::move(form), std::move(upos), std::move(label), {}, {}, false});
    return static_cast<int>(nodes.size()) - 1;
  }

  // Returns the noun node; *cls receives its lexical class, *plural its number.
  int noun_phrase(int depth, bool object, int* cls, bool* plural) {
    const Entry& n = pick(g_.nouns);
    *cls = n.cls;
    *plural = chance(0.3);
    std::string form = surface(g_, n.stem);
    if (*plural) form += g_.plural;
    if (object && g_.lang.object_case) form += g_.object_suffix;
    const int head = add(form, "NOUN", object ? "obj" : "nsubj");
    std::vector<int> pre, post;
    if (chance(0.6)) pre.push_back(add(surface(g_, pick(g_.determiners).stem), "DET", "det"));
    const int adjectives = chance(0.4) ? 1 + static_cast<int>(rng_() % 2) : 0;
    for (int i = 0; i < adjectives; ++i) {
      const int a = add(surface(g_, pick(g_.adjectives).stem), "ADJ", "amod");
      (g_.lang.adjective_first ? pre : post).push_back(a);
    }
    if (depth == 0 && chance(g_.lang.relative_clause)) {
      const int rel = relative_clause(depth + 1);
      post.push_back(rel);
    }
    nodes[head].left = pre;
    nodes[head].right = post;
    return head;
  }

  int relative_clause(int depth) {
    const Entry& v = pick(g_.verbs);
    const int verb = add(surface(g_, v.stem) + g_.verb_suffix, "VERB", "acl:relcl");
    const int mark = add(surface(g_, g_.relativizer), "PRON", "mark");
    nodes[verb].left.push_back(mark);
    if (v.cls == 1) {
      int cls;
      bool plural;
      const int obj = noun_phrase(depth, true, &cls, &plural);
      if (g_.lang.order == WordOrder::SOV) nodes[verb].left.push_back(obj);
      else nodes[verb].right.push_back(obj);
    }
    return verb;
  }

  int clause(int depth) {
    const Entry& v = pick(g_.verbs);
    int subj_cls, obj_cls = -1;
    bool subj_plural, obj_plural;
    const int subj = noun_phrase(depth, false, &subj_cls, &subj_plural);
    int obj = -1;
    if (v.cls == 1) obj = noun_phrase(depth, true, &obj_cls, &obj_plural);
    std::string vform = surface(g_, v.stem) + g_.verb_suffix;
    if (subj_plural) vform += g_.agreement;
    const int verb = add(vform, "VERB", "root");

    // an extraposed subject relative clause lands after the verb phrase
    for (int r : nodes[subj].right)
      if (nodes[r].label == "acl:relcl" && chance(g_.lang.extraposition))
        nodes[r].extraposed = true;

    Node& vn = nodes[verb];
    switch (g_.lang.order) {
      case WordOrder::SVO:
        vn.left.push_back(subj);
        if (obj >= 0) vn.right.push_back(obj);
        break;
      case WordOrder::SOV:
        vn.left.push_back(subj);
        if (obj >= 0) vn.left.push_back(obj);
        break;
      case WordOrder::VSO:
        vn.right.push_back(subj);
        if (obj >= 0) vn.right.push_back(obj);
        break;
    }
    if (chance(0.4)) {
      const Entry& adp = pick(g_.adpositions);
      int cls;
      bool plural;
      const int pobj = noun_phrase(depth + 1, false, &cls, &plural);
      const int c = add(surface(g_, adp.stem), "ADP", "case");
      if (g_.lang.prepositions) nodes[pobj].left.insert(nodes[pobj].left.begin(), c);
      else nodes[pobj].right.push_back(c);
      if (cls == adp.cls || (obj < 0 && subj_cls != adp.cls && cls % 2 == 0)) {
        nodes[pobj].label = "obl";
        if (g_.lang.order == WordOrder::SOV) nodes[verb].left.insert(nodes[verb].left.begin(), pobj);
        else nodes[verb].right.push_back(pobj);
      } else {
        const int host = obj >= 0 ? obj : subj;
        nodes[pobj].label = "nmod";
        nodes[host].right.push_back(pobj);
      }
    }
    if (chance(0.3)) {
      const int adv = add(surface(g_, pick(g_.adverbs).stem), "ADV", "advmod");
      nodes[verb].right.push_back(adv);
    }
    return verb;
  }

  const Grammar& g_;
  std::mt19937_64& rng_;
};

void linearize(const std::vector<Node>& nodes, int n, std::vector<int>& out,
               std::vector<int>& held) {
  for (int d : nodes[n].left) {
    if (nodes[d].extraposed) held.push_back(d);
    else linearize(nodes, d, out, held);
  }
  out.push_back(n);
  for (int d : nodes[n].right) {
    if (nodes[d].extraposed) held.push_back(d);
    else linearize(nodes, d, out, held);
  }
}

}  // namespace

std::vector<Sentence> generate_treebank(const SyntheticLanguage& lang,
                                        std::size_t sentences,
                                        std::uint64_t seed) {
  const Grammar g = make_grammar(lang);
  std::mt19937_64 rng(seed ^ (lang.family << 20) ^ lang.variant);
  std::vector<Sentence> out;
  out.reserve(sentences);
  for (std::size_t s = 0; s < sentences; ++s) {
    Builder b(g, rng);
    const int root = b.root_clause();
    std::vector<int> order, held;
    // punctuation stays last: linearize without it, then append
    const int punct = b.nodes[root].right.back();
    b.nodes[root].right.pop_back();
    linearize(b.nodes, root, order, held);
    for (int h : held) {
      std::vector<int> inner;
      linearize(b.nodes, h, order, inner);
    }
    order.push_back(punct);

    std::vector<int> position(b.nodes.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = static_cast<int>(i) + 1;
    std::vector<int> parent(b.nodes.size(), -1);
    for (std::size_t n = 0; n < b.nodes.size(); ++n) {
      for (int d : b.nodes[n].left) parent[d] = static_cast<int>(n);
      for (int d : b.nodes[n].right) parent[d] = static_cast<int>(n);
    }
    parent[punct] = root;

    Sentence sent;
    sent.language = lang.code;
    const std::string id = "# sent_id = " + lang.code + "-" + std::to_string(s + 1);
    sent.comments.push_back(id);
    sent.layout.push_back({-1, id});
    for (std::size_t i = 0; i < order.size(); ++i) {
      const Node& node = b.nodes[order[i]];
      Token t;
      t.index = static_cast<int>(i) + 1;
      t.form = node.form;
      t.head = order[i] == root ? 0 : position[parent[order[i]]];
      t.label = node.label;
      t.columns = {std::to_string(t.index), t.form, "_", node.upos, "_", "_",
                   std::to_string(t.head), t.label, "_", "_"};
      sent.layout.push_back({static_cast<int>(sent.tokens.size()), {}});
      sent.tokens.push_back(std::move(t));
    }
    validate_tree(sent.heads(), id);
    out.push_back(std::move(sent));
  }
  return out;
}

}  // namespace biparse
