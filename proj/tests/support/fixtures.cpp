#include "fixtures.hpp"

#include <cstdio>

namespace askdata::testing {

namespace {

FieldSpec field(std::string name, std::string type, std::string description) {
    FieldSpec f;
    f.name = std::move(name);
    f.data_type = std::move(type);
    f.description = std::move(description);
    return f;
}

}  // namespace

TableSchema employee_schema() {
    TableSchema t;
    t.table_name = "employee";
    t.description = "Monthly sales performance of chain supermarket employees";
    t.dialect = Dialect::Embedded;
    t.fields = {field("name", "VARCHAR(64)", "employee full name"),
                field("month", "INT", "calendar month of the sales record, 1-12"),
                field("year", "INT", "calendar year of the sales record"),
                field("sales_amount", "DECIMAL(12,2)", "total sales amount in the month")};
    return t;
}

TableSchema highschooler_schema() {
    TableSchema t;
    t.table_name = "Highschooler";
    t.description = "High school students";
    t.dialect = Dialect::Embedded;
    t.fields = {field("ID", "INT", "student id"), field("name", "TEXT", "student name"),
                field("grade", "INT", "grade the student is in, 9-12")};
    return t;
}

TableSchema friend_schema() {
    TableSchema t;
    t.table_name = "Friend";
    t.description = "Friendship edges between students";
    t.dialect = Dialect::Embedded;
    t.fields = {field("student_id", "INT", "student id"), field("friend_id", "INT", "id of the friend")};
    return t;
}

TableSchema likes_schema() {
    TableSchema t;
    t.table_name = "Likes";
    t.description = "Which student likes which";
    t.dialect = Dialect::Embedded;
    t.fields = {field("student_id", "INT", "student id"), field("liked_id", "INT", "id of the liked student")};
    return t;
}

TableSchema orders_schema() {
    TableSchema t;
    t.table_name = "orders";
    t.description = "Customer orders";
    t.dialect = Dialect::Embedded;
    FieldSpec status = field("status", "VARCHAR(16)", "order status");
    status.enum_values = {{"paid", "payment received"}, {"shipped", "handed to carrier"}, {"refunded", "money returned"}};
    t.fields = {field("id", "INT", "order id"), field("customer_id", "INT", "buyer id"),
                field("amount", "DECIMAL(10,2)", "order total"), status,
                field("created_at", "DATE", "order date")};
    return t;
}

TableSchema customers_schema() {
    TableSchema t;
    t.table_name = "customers";
    t.description = "Registered customers";
    t.dialect = Dialect::Embedded;
    t.fields = {field("id", "INT", "customer id"), field("name", "VARCHAR(64)", "customer name"),
                field("city", "VARCHAR(32)", "home city")};
    return t;
}

TableSchema issues_schema() {
    TableSchema t;
    t.table_name = "issues";
    t.description = "Online issues raised against platform departments";
    t.dialect = Dialect::Embedded;
    FieldSpec status = field("status", "VARCHAR(16)", "issue workflow status");
    status.enum_values = {{"open", "not yet handled"},
                          {"closed", "resolved and closed"},
                          {"finished", "work finished"},
                          {"published", "fix released"}};
    t.fields = {field("id", "INT", "issue id"), field("department", "VARCHAR(64)", "owning department"),
                status, field("begin_time", "DATETIME", "when the issue was raised"),
                field("closed_time", "DATETIME", "when the issue was closed"),
                field("month", "INT", "month the issue was raised"), field("year", "INT", "year the issue was raised")};
    return t;
}

Catalog fixture_catalog() {
    Catalog c;
    for (auto schema : {employee_schema(), highschooler_schema(), friend_schema(), likes_schema(), orders_schema(),
                        customers_schema(), issues_schema()}) {
        c.register_table(schema);
    }
    c.register_domain({"sales", {"employee"}});
    c.register_domain({"school", {"Highschooler", "Friend", "Likes"}});
    c.register_domain({"shop", {"orders", "customers"}});
    c.register_domain({"ops", {"issues"}});
    for (const char* t : {"employee", "Highschooler", "Friend", "Likes", "orders", "customers", "issues"}) {
        c.grant({"analyst", t, std::nullopt});
    }
    c.grant({"intern", "employee", NameSet{"name", "month", "year"}});
    return c;
}

std::string employee_script() {
    std::string s =
        "CREATE TABLE employee (name VARCHAR(64), month INT, year INT, sales_amount DECIMAL(12,2));\n";
    const struct {
        const char* name;
        int base;
    } people[] = {{"Zhou Hui", 1000}, {"Zhao Li", 2000}};
    for (const auto& p : people) {
        for (int year = 2021; year <= 2022; ++year) {
            for (int month = 1; month <= 12; ++month) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "INSERT INTO employee VALUES ('%s', %d, %d, %d);\n", p.name, month,
                              year, p.base + 10 * month + 500 * (year - 2021));
                s += buf;
            }
        }
    }
    return s;
}

std::string school_script() {
    return "CREATE TABLE Highschooler (ID INT, name TEXT, grade INT);\n"
           "INSERT INTO Highschooler VALUES (1, 'Ann', 9), (2, 'Bo', 9), (3, 'Cy', 10), (4, 'Di', 10), "
           "(5, 'Ed', 10), (6, 'Fay', 11), (7, 'Gus', 12), (8, 'Hal', 12), (9, 'Ivy', 12), (10, 'Jo', 12);\n"
           "CREATE TABLE Friend (student_id INT, friend_id INT);\n"
           "INSERT INTO Friend VALUES (1, 2), (2, 1), (3, 7), (7, 3), (4, 5), (9, 10);\n"
           "CREATE TABLE Likes (student_id INT, liked_id INT);\n"
           "INSERT INTO Likes VALUES (1, 3), (2, 3), (4, 7), (8, 9);\n";
}

std::string shop_script() {
    return "CREATE TABLE customers (id INT, name VARCHAR(64), city VARCHAR(32));\n"
           "INSERT INTO customers VALUES (1, 'Acme', 'Beijing'), (2, 'Bolt', 'Shanghai'), (3, 'Crane', 'Beijing');\n"
           "CREATE TABLE orders (id INT, customer_id INT, amount DECIMAL(10,2), status VARCHAR(16), created_at DATE);\n"
           "INSERT INTO orders VALUES (1, 1, 120, 'paid', '2023-03-01'), (2, 1, 80, 'shipped', '2023-03-05'), "
           "(3, 2, 300, 'paid', '2023-03-09'), (4, 3, 50, 'refunded', '2023-04-02'), "
           "(5, 2, 75, 'shipped', '2023-04-11');\n";
}

std::string issues_script() {
    return "CREATE TABLE issues (id INT, department VARCHAR(64), status VARCHAR(16), begin_time DATETIME, "
           "closed_time DATETIME, month INT, year INT);\n"
           "INSERT INTO issues VALUES "
           "(1, 'Intelligent Office Platform', 'closed', '2023-08-01', '2023-08-03', 8, 2023), "
           "(2, 'Intelligent Office Platform', 'open', '2023-08-02', NULL, 8, 2023), "
           "(3, 'Intelligent Office Platform', 'published', '2023-08-05', '2023-08-09', 8, 2023), "
           "(4, 'Intelligent Office Platform', 'finished', '2023-08-10', '2023-08-12', 8, 2023), "
           "(5, 'Search', 'open', '2023-08-11', NULL, 8, 2023), "
           "(6, 'Intelligent Office Platform', 'open', '2023-07-20', NULL, 7, 2023);\n";
}

std::shared_ptr<EmbeddedConnection> fixture_connection() {
    auto conn = std::make_shared<EmbeddedConnection>();
    conn->execute_script(employee_script());
    conn->execute_script(school_script());
    conn->execute_script(shop_script());
    conn->execute_script(issues_script());
    return conn;
}

}  // namespace askdata::testing
