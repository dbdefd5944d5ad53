#pragma once

#include <string>
#include <vector>

#include "ccmdp/classifier.hpp"
#include "ccmdp/cmdp.hpp"
#include "ccmdp/curve.hpp"
#include "ccmdp/info.hpp"
#include "ccmdp/solver.hpp"
#include "ccmdp/transfer.hpp"
#include "ccmdp/trmc.hpp"

namespace ccmdp {

/// Whole-file reads/writes; std::invalid_argument on unreadable paths.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// JSON schemas, version 1 each. Serialization is deterministic (sorted
/// keys, fixed indentation, shortest round-trip numbers), so identical
/// inputs produce identical bytes.
std::string cmdp_to_json(const TabularCMDP& m);
/// Parses, reconstructs, and validates; throws std::invalid_argument naming
/// the offending key or listing table violations.
TabularCMDP cmdp_from_json(const std::string& text);

/// Classifier files always store logits as [factor][state][concept]; a
/// plain classifier is the one-factor case.
std::string classifier_to_json(const ConceptClassifier& c);
std::string classifier_to_json(const FactoredClassifier& c);
ConceptClassifier classifier_from_json(const std::string& text);
FactoredClassifier factored_from_json(const std::string& text);

std::string solution_to_json(const Solution& sol);
std::string bound_report_to_json(const BoundReport& r);

std::string suite_report_to_json(const SuiteReport& r);
SuiteReport suite_report_from_json(const std::string& text);
/// Internal-consistency audit of a (possibly edited) suite report: margins
/// must re-derive from their stored components and sit above -1e-7, and the
/// violation tallies must match. Returns the number of problems found.
int recheck_suite_report(const SuiteReport& r);

std::string transfer_report_to_json(const TransferReport& r);
std::string trmc_state_to_json(const TRMCState& s);

/// Rows `episode,seed,context,return,steps`, one block per curve.
std::string curve_to_csv(const LearningCurve& curve);
std::string curves_to_csv(const std::vector<LearningCurve>& curves);

}  // namespace ccmdp
