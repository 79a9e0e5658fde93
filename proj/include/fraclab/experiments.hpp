#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fraclab/errors.hpp"

namespace fraclab {

struct ExperimentParams {
    std::vector<double> s_values; // empty = experiment default
    double R = 1.0;
    int n = 1;
    int N = 0;      // 0 = experiment default
    double q = 0.0; // 0 = grading matched to s
    std::uint64_t seed = 12345;
    std::string potential_spec;
    std::string data_spec;
};

struct CsvTable {
    std::string filename;
    std::string law; // goes into the header comment line
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
    std::string name;
    bool pass = true;
    std::vector<std::string> checks; // "PASS ..." / "FAIL ..." lines
    std::map<std::string, double> fitted;
    std::vector<CsvTable> tables;

    void check(bool ok, const std::string& what);
    void fit(const std::string& key, double value) { fitted[key] = value; }
};

// registry of the sixteen named experiments, in listing order
const std::vector<std::string>& experiment_names();
bool is_experiment(const std::string& name);
ExperimentResult run_experiment(const std::string& name, const ExperimentParams& p);

// CSV (RFC-4180 quoting) plus a gnuplot-ready .dat twin per table
void write_outputs(const ExperimentResult& res, const std::string& outdir);

// structured summary of a batch run
void write_summary(const std::vector<ExperimentResult>& results,
                   const std::string& outdir, std::uint64_t seed);

} // namespace fraclab
