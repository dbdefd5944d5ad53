#include "ccmdp/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ccmdp {

ClassifierRows ConceptClassifier::soft_rows() const {
  if (!(temperature > 0.0))
    throw std::invalid_argument("classifier temperature must be > 0");
  ClassifierRows rows(logits.size());
  for (std::size_t s = 0; s < logits.size(); ++s) {
    const auto& z = logits[s];
    Dist row(z.size());
    const double z_max = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
      row[k] = std::exp((z[k] - z_max) / temperature);
      total += row[k];
    }
    for (double& x : row) x /= total;
    rows[s] = std::move(row);
  }
  return rows;
}

std::vector<int> ConceptClassifier::hard_assignment() const {
  std::vector<int> assignment(logits.size());
  for (std::size_t s = 0; s < logits.size(); ++s) {
    const auto& z = logits[s];
    int best = 0;
    for (int k = 1; k < static_cast<int>(z.size()); ++k)
      if (z[k] > z[best]) best = k;
    assignment[s] = best;
  }
  return assignment;
}

ClassifierRows ConceptClassifier::hard_rows() const {
  ClassifierRows rows(logits.size(), Dist(n_concepts, 0.0));
  const auto assignment = hard_assignment();
  for (std::size_t s = 0; s < logits.size(); ++s) rows[s][assignment[s]] = 1.0;
  return rows;
}

ClassifierRows ConceptClassifier::rows() const {
  return mode == Mode::hard ? hard_rows() : soft_rows();
}

ConceptClassifier ConceptClassifier::from_assignment(
    const std::vector<int>& assignment, int n_concepts) {
  ConceptClassifier c;
  c.n_concepts = n_concepts;
  c.temperature = 1.0;
  c.mode = Mode::hard;
  c.logits.assign(assignment.size(), std::vector<double>(n_concepts, -LOGIT_CLIP));
  for (std::size_t s = 0; s < assignment.size(); ++s) {
    if (assignment[s] < 0 || assignment[s] >= n_concepts)
      throw std::invalid_argument("from_assignment: concept index out of range");
    c.logits[s][assignment[s]] = LOGIT_CLIP;
  }
  return c;
}

ConceptClassifier ConceptClassifier::identity(int n_states) {
  std::vector<int> assignment(n_states);
  for (int s = 0; s < n_states; ++s) assignment[s] = s;
  return from_assignment(assignment, n_states);
}

ConceptClassifier ConceptClassifier::constant(int n_states) {
  return from_assignment(std::vector<int>(n_states, 0), 1);
}

int FactoredClassifier::product_size() const {
  int total = 1;
  for (const auto& f : factors) total *= f.n_concepts;
  return total;
}

ClassifierRows FactoredClassifier::rows() const {
  if (factors.empty()) throw std::invalid_argument("factored classifier: no factors");
  const std::size_t n_states = factors[0].logits.size();
  std::vector<ClassifierRows> per_factor;
  per_factor.reserve(factors.size());
  for (const auto& f : factors) {
    if (f.logits.size() != n_states)
      throw std::invalid_argument("factored classifier: state count mismatch");
    per_factor.push_back(f.rows());
  }
  const int total = product_size();
  ClassifierRows rows(n_states, Dist(total, 0.0));
  for (std::size_t s = 0; s < n_states; ++s)
    for (int k = 0; k < total; ++k) {
      double p = 1.0;
      int rest = k;
      for (std::size_t i = 0; i < factors.size(); ++i) {
        const int u = rest % factors[i].n_concepts;
        rest /= factors[i].n_concepts;
        p *= per_factor[i][s][u];
      }
      rows[s][k] = p;
    }
  return rows;
}

ConceptClassifier FactoredClassifier::induced_classifier() const {
  if (factors.empty()) throw std::invalid_argument("factored classifier: no factors");
  const double temp = factors[0].temperature;
  for (const auto& f : factors)
    if (f.temperature != temp)
      throw std::invalid_argument("factored classifier: unequal temperatures");
  const std::size_t n_states = factors[0].logits.size();
  ConceptClassifier out;
  out.n_concepts = product_size();
  out.temperature = temp;
  out.mode = factors[0].mode;
  out.logits.assign(n_states, std::vector<double>(out.n_concepts, 0.0));
  for (std::size_t s = 0; s < n_states; ++s)
    for (int k = 0; k < out.n_concepts; ++k) {
      double z = 0.0;
      int rest = k;
      for (const auto& f : factors) {
        z += f.logits[s][rest % f.n_concepts];
        rest /= f.n_concepts;
      }
      out.logits[s][k] = z;
    }
  return out;
}

}  // namespace ccmdp
