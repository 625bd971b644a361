#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "thermoid/fem.hpp"
#include "thermoid/interp.hpp"
#include "thermoid/optimize.hpp"
#include "thermoid/sensors.hpp"

namespace thermoid {

// Round-trip exact decimal form of a double.
std::string format_double(double v);

// Splits a CSV file into rows of fields; skips blank lines and an optional
// header row whose first cell is not numeric.
std::vector<std::vector<std::string>> read_csv(const std::string& path);
double parse_double(const std::string& cell, const std::string& where);
int parse_int(const std::string& cell, const std::string& where);

// node_id,delta_T (also used for masks and gradients with another header)
void write_field_csv(std::ostream& out, const NodalField& field, const std::string& value_name = "delta_T");
void write_field_csv(const std::string& path, const NodalField& field, const std::string& value_name = "delta_T");
NodalField read_field_csv(const std::string& path, int expected_nodes);

// case_id,sensor_id,value
void write_measurements_csv(const std::string& path, const MeasurementSet& m);
MeasurementSet read_measurements_csv(const std::string& path, const std::vector<LoadCase>& cases,
                                     const SensorSet& sensors);

// node_id,ux,uy,uz
void write_displacements_csv(const std::string& path, const DisplacementField& u);

// iteration,cost,step,grad_norm
void write_convergence_csv(const std::string& path, const std::vector<IterationRecord>& log);

// x,y,z,value
void write_samples_csv(const std::string& path, const SampleSet& samples);
SampleSet read_samples_csv(const std::string& path);

/// Legacy ASCII VTK unstructured grid with one point-data scalar array.
void write_vtk(std::ostream& out, const Mesh& mesh, const NodalField& field, const std::string& name = "delta_T");
void write_vtk(const std::string& path, const Mesh& mesh, const NodalField& field,
               const std::string& name = "delta_T");

}  // namespace thermoid
