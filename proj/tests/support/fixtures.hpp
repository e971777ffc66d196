#pragma once

#include <memory>
#include <string>

#include "askdata/catalog.hpp"
#include "askdata/engine.hpp"

namespace askdata::testing {

inline constexpr const char* kSalesDomain = "sales";
inline constexpr const char* kSchoolDomain = "school";

TableSchema employee_schema();
TableSchema highschooler_schema();
TableSchema friend_schema();
TableSchema likes_schema();
TableSchema orders_schema();
TableSchema customers_schema();
TableSchema issues_schema();

/// Every fixture table registered. Domains:
///   sales  -> employee
///   school -> Highschooler, Friend, Likes
///   shop   -> orders, customers
///   ops    -> issues
/// Grants: "analyst" has everything, "intern" has employee.{name, month,
/// year}, "guest" has nothing.
Catalog fixture_catalog();

/// Monthly sales for two employees over 2021-2022; sales_amount =
/// base + 10*month + 500*(year-2021), base 1000 for Zhou Hui and 2000 for Zhao Li.
std::string employee_script();
/// Grades 9-12 with 2, 3, 1 and 4 students, plus friend/like edges.
std::string school_script();
std::string shop_script();
std::string issues_script();

/// Embedded connection with every fixture script loaded.
std::shared_ptr<EmbeddedConnection> fixture_connection();

/// A generated query for one employee's second-half sales, and a
/// pred/gold pair that differs only in an extra projected count.
inline constexpr const char* kZhouHuiSql =
    "SELECT name,month, sales_amount\n"
    "FROM employee \n"
    "WHERE name = \"Zhou Hui\"\n"
    "AND (month BETWEEN 7 AND 12)\n"
    "AND employee.year = 2022\n"
    "ORDER BY month ASC;";
inline constexpr const char* kGradeCountPred =
    "SELECT grade, COUNT(*) AS num_highschoolers FROM Highschooler GROUP BY grade\n"
    "ORDER BY num_highschoolers DESC LIMIT 1;";
inline constexpr const char* kGradeCountGold =
    "SELECT grade FROM Highschooler GROUP BY grade ORDER BY count(*) DESC LIMIT 1;";

}  // namespace askdata::testing
