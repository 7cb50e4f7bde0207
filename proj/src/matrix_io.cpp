#include "matflow/matrix_io.hpp"

#include <cstdio>
#include <fstream>

#include "matflow/errors.hpp"

namespace matflow {

using nlohmann::json;

json matrix_to_json(const Matrix& a) {
    json re = json::array();
    json im = json::array();
    for (std::size_t j = 0; j < a.n(); ++j) {
        json rrow = json::array();
        json irow = json::array();
        for (std::size_t k = 0; k < a.n(); ++k) {
            rrow.push_back(a(j, k).real());
            irow.push_back(a(j, k).imag());
        }
        re.push_back(std::move(rrow));
        im.push_back(std::move(irow));
    }
    return json{{"n", a.n()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

namespace {

void read_part(const json& rows, std::size_t n, const char* name, Matrix& out, bool imaginary) {
    if (!rows.is_array() || rows.size() != n)
        throw InvalidInput(std::string("matrix file: \"") + name + "\" must have n rows");
    for (std::size_t j = 0; j < n; ++j) {
        const auto& row = rows[j];
        if (!row.is_array() || row.size() != n)
            throw InvalidInput(std::string("matrix file: ragged row ") + std::to_string(j) + " in \"" + name + "\"");
        for (std::size_t k = 0; k < n; ++k) {
            if (!row[k].is_number())
                throw InvalidInput(std::string("matrix file: non-numeric entry in \"") + name + "\"");
            const double x = row[k].get<double>();
            if (imaginary)
                out(j, k) = Complex(out(j, k).real(), x);
            else
                out(j, k) = Complex(x, out(j, k).imag());
        }
    }
}

} // namespace

Matrix matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("re"))
        throw InvalidInput("matrix file: expected an object with \"n\" and \"re\"");
    if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1)
        throw InvalidInput("matrix file: \"n\" must be a positive integer");
    const auto n = j["n"].get<std::size_t>();
    Matrix m(n);
    read_part(j["re"], n, "re", m, false);
    if (j.contains("im")) read_part(j["im"], n, "im", m, true);
    return m;
}

Matrix read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open matrix file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InvalidInput("matrix file " + path.string() + ": " + e.what());
    }
    return matrix_from_json(j);
}

void write_matrix_file(const std::filesystem::path& path, const Matrix& a) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write matrix file " + path.string());
    out << matrix_to_json(a).dump(2) << '\n';
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace matflow
