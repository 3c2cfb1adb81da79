/**
 * @file reports.hpp
 * @brief JSON serialization of engine and diagnostic reports.
 */

#pragma once

#include <json.hpp>

#include "semiflow/chernoff.hpp"
#include "semiflow/diagnostics.hpp"

namespace semiflow {

nlohmann::json to_json(const ConvergenceReport& r);
nlohmann::json to_json(const DefectResult& r);
nlohmann::json to_json(const GeneratorTable& t);
nlohmann::json to_json(const GenConditionReport& r);
nlohmann::json to_json(const LipschitzCertificate& c);
nlohmann::json to_json(const SymmetricCertificate& c);
nlohmann::json to_json(const InvarianceReport& r);
nlohmann::json to_json(const AuditReport& r);

/// Reads back the fields written by to_json(ConvergenceReport).
ConvergenceReport convergence_report_from_json(const nlohmann::json& j);

/// JSON number, or null for non-finite values (JSON has no infinities).
nlohmann::json json_number(double v);

}  // namespace semiflow
