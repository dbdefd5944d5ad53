#pragma once

#include <cstdint>
#include <vector>

#include "ccmdp/info.hpp"

namespace ccmdp {

/// State-to-concept classifier phi: logits per state over N_S concepts.
/// The soft view is softmax(logits/temperature); the hard view one-hot
/// argmax with lowest-index tie-break.
struct ConceptClassifier {
  enum class Mode { soft, hard };

  int n_concepts = 0;
  std::vector<std::vector<double>> logits;  // [state][concept]
  double temperature = 1.0;
  Mode mode = Mode::soft;

  ClassifierRows soft_rows() const;
  ClassifierRows hard_rows() const;
  ClassifierRows rows() const;  // per mode
  std::vector<int> hard_assignment() const;

  static ConceptClassifier from_assignment(const std::vector<int>& assignment,
                                           int n_concepts);
  static ConceptClassifier identity(int n_states);
  static ConceptClassifier constant(int n_states);
};

/// Compositional classifier: independent factors U_i; the induced product
/// classifier has one concept per tuple (u_0, ..., u_{N_U-1}), index
/// u_0 + |U_0|*(u_1 + |U_1|*(...)).
struct FactoredClassifier {
  std::vector<ConceptClassifier> factors;

  int product_size() const;
  /// Product rows: outer product of factor soft (or hard) rows.
  ClassifierRows rows() const;
  /// Equivalent single classifier: logits sum across factors (valid because
  /// factor temperatures are kept equal).
  ConceptClassifier induced_classifier() const;
};

/// Magnitude bound on logits; keeps soft rows full-support at temperature 1.
constexpr double LOGIT_CLIP = 30.0;

}  // namespace ccmdp
