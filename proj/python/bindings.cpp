#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "esp/circuit.hpp"
#include "esp/dof.hpp"
#include "esp/em.hpp"
#include "esp/modes.hpp"
#include "esp/ris.hpp"
#include "esp/rng.hpp"
#include "esp/scm.hpp"
#include "esp/sim.hpp"
#include "esp/version.hpp"

namespace py = pybind11;
using namespace esp;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Over-the-air electromagnetic signal processing toolkit";
  m.attr("__version__") = kVersion;
  m.attr("FREE_SPACE_IMPEDANCE") = kFreeSpaceImpedance;

  // ---------------------------------------------------------------- em core
  py::class_<Medium>(m, "Medium")
      .def(py::init<double, double>(), py::arg("wavelength"),
           py::arg("impedance") = kFreeSpaceImpedance)
      .def_readonly("wavelength", &Medium::wavelength)
      .def_readonly("impedance", &Medium::impedance)
      .def("wavenumber", &Medium::wavenumber);

  py::class_<CurrentElement>(m, "CurrentElement")
      .def(py::init([](const Vec3& position, const Vec3& orientation, double length,
                       Complex amplitude) {
             return CurrentElement{position, orientation, length, amplitude};
           }),
           py::arg("position"), py::arg("orientation"), py::arg("length"),
           py::arg("amplitude") = Complex(1.0, 0.0))
      .def_readwrite("position", &CurrentElement::position)
      .def_readwrite("orientation", &CurrentElement::orientation)
      .def_readwrite("length", &CurrentElement::length)
      .def_readwrite("amplitude", &CurrentElement::amplitude);

  m.def("green_dyadic", &green_dyadic, py::arg("r"), py::arg("medium"));
  m.def(
      "field_from_currents",
      [](const std::vector<CurrentElement>& elements, const Vec3& r,
         const Medium& medium) { return field_from_currents(elements, r, medium); },
      py::arg("elements"), py::arg("r"), py::arg("medium"));
  m.def(
      "far_field",
      [](const std::vector<CurrentElement>& elements, const Vec3& direction,
         const Medium& medium) { return far_field(elements, direction, medium); },
      py::arg("elements"), py::arg("direction"), py::arg("medium"));
  m.def("is_radiating", &is_radiating, py::arg("k"), py::arg("medium"),
        py::arg("tolerance") = 1e-9);
  m.def("in_visible_region", &in_visible_region, py::arg("kx"), py::arg("ky"),
        py::arg("medium"));

  // ------------------------------------------------------------------- dof
  py::enum_<dof::DofMethod>(m, "DofMethod")
      .value("formula", dof::DofMethod::formula)
      .value("lattice", dof::DofMethod::lattice);
  py::enum_<dof::LinkDofModel>(m, "LinkDofModel")
      .value("classic", dof::LinkDofModel::classic)
      .value("corrected", dof::LinkDofModel::corrected);

  py::class_<dof::ApertureGeometry>(m, "ApertureGeometry")
      .def_static("segment", &dof::ApertureGeometry::segment, py::arg("length"))
      .def_static("rectangle", &dof::ApertureGeometry::rectangle, py::arg("lx"),
                  py::arg("ly"))
      .def_static("box", &dof::ApertureGeometry::box, py::arg("lx"), py::arg("ly"),
                  py::arg("lz"))
      .def("formula_supported", &dof::ApertureGeometry::formula_supported)
      .def("below_asymptotic_regime", &dof::ApertureGeometry::below_asymptotic_regime);

  py::class_<dof::LinkGeometry>(m, "LinkGeometry")
      .def_static("segments", &dof::LinkGeometry::segments, py::arg("lt"),
                  py::arg("lr"), py::arg("distance"))
      .def_static("squares", &dof::LinkGeometry::squares, py::arg("at"), py::arg("ar"),
                  py::arg("distance"));

  py::class_<dof::DofResult>(m, "DofResult")
      .def_readonly("value", &dof::DofResult::value)
      .def_readonly("lattice_count", &dof::DofResult::lattice_count)
      .def_readonly("method", &dof::DofResult::method);

  m.def("dof_unbounded", &dof::dof_unbounded, py::arg("geometry"), py::arg("medium"),
        py::arg("method"));
  m.def("dof_link", &dof::dof_link, py::arg("geometry"), py::arg("medium"),
        py::arg("model"));

  py::class_<dof::DftCodebook>(m, "DftCodebook")
      .def_readonly("matrix", &dof::DftCodebook::matrix)
      .def_readonly("beam_index", &dof::DftCodebook::beam_index)
      .def_readonly("beam_angle", &dof::DftCodebook::beam_angle);
  m.def("dft_codebook", &dof::dft_codebook, py::arg("n"));

  // ----------------------------------------------------------------- modes
  py::class_<modes::SampledSpace>(m, "SampledSpace")
      .def_static("segment", &modes::SampledSpace::segment, py::arg("length"),
                  py::arg("pitch"), py::arg("center"), py::arg("axis"),
                  py::arg("polarization"), py::arg("element_length"))
      .def_static("square", &modes::SampledSpace::square, py::arg("side"),
                  py::arg("pitch"), py::arg("center"), py::arg("axis_u"),
                  py::arg("axis_v"), py::arg("polarization"), py::arg("element_length"))
      .def_readonly("elements", &modes::SampledSpace::elements)
      .def_readonly("pitch", &modes::SampledSpace::pitch)
      .def("undersampled", &modes::SampledSpace::undersampled);

  m.def("coupling_matrix", &modes::coupling_matrix, py::arg("src"), py::arg("dst"),
        py::arg("medium"));

  py::class_<modes::ModeDecomposition>(m, "ModeDecomposition")
      .def_readonly("left_basis", &modes::ModeDecomposition::left_basis)
      .def_readonly("singular_values", &modes::ModeDecomposition::singular_values)
      .def_readonly("right_basis", &modes::ModeDecomposition::right_basis);
  m.def("mode_decomposition", &modes::mode_decomposition, py::arg("coupling"));

  m.def(
      "count_dof_threshold_db",
      [](const modes::ModeDecomposition& dec, double db) {
        return modes::count_dof(dec, modes::DofCriterion::threshold_db(db));
      },
      py::arg("decomposition"), py::arg("threshold_db"));
  m.def(
      "count_dof_energy_fraction",
      [](const modes::ModeDecomposition& dec, double fraction) {
        return modes::count_dof(dec, modes::DofCriterion::energy_fraction(fraction));
      },
      py::arg("decomposition"), py::arg("fraction"));

  py::class_<modes::PowerAllocation>(m, "PowerAllocation")
      .def_readonly("powers", &modes::PowerAllocation::powers)
      .def_readonly("water_level", &modes::PowerAllocation::water_level);
  m.def("water_filling", &modes::water_filling, py::arg("gains"),
        py::arg("noise_power"), py::arg("total_power"));
  m.def("link_capacity", &modes::link_capacity, py::arg("gains"),
        py::arg("noise_power"), py::arg("total_power"));

  py::class_<modes::CascadeLink>(m, "CascadeLink")
      .def_static("from_matrices", &modes::CascadeLink::from_matrices, py::arg("h_t"),
                  py::arg("h_r"), py::arg("usable_in") = -1, py::arg("usable_out") = -1)
      .def_readonly("coupling_t", &modes::CascadeLink::coupling_t)
      .def_readonly("coupling_r", &modes::CascadeLink::coupling_r)
      .def("max_modes", &modes::CascadeLink::max_modes);
  m.def("cascade_capacity", &modes::cascade_capacity, py::arg("link"),
        py::arg("noise_power"), py::arg("total_power"));

  py::class_<modes::ScatterDesign>(m, "ScatterDesign")
      .def_readonly("matrix", &modes::ScatterDesign::matrix)
      .def_readonly("degenerate", &modes::ScatterDesign::degenerate);
  m.def("optimal_scatter_matrix", &modes::optimal_scatter_matrix, py::arg("h_t"),
        py::arg("h_r"));

  // ---------------------------------------------------------------- circuit
  py::class_<circuit::DipoleArray::Element>(m, "DipoleElement")
      .def(py::init([](const Vec3& position, const Vec3& orientation) {
             return circuit::DipoleArray::Element{position, orientation};
           }),
           py::arg("position"), py::arg("orientation"))
      .def_readwrite("position", &circuit::DipoleArray::Element::position)
      .def_readwrite("orientation", &circuit::DipoleArray::Element::orientation);

  py::class_<circuit::DipoleArray>(m, "DipoleArray")
      .def(py::init<>())
      .def_static("concentric_rings", &circuit::DipoleArray::concentric_rings,
                  py::arg("rings"), py::arg("spacing"), py::arg("element_length"))
      .def_readwrite("elements", &circuit::DipoleArray::elements)
      .def_readwrite("element_length", &circuit::DipoleArray::element_length)
      .def_readwrite("self_reactance", &circuit::DipoleArray::self_reactance)
      .def("ports", &circuit::DipoleArray::ports)
      .def("electrically_long", &circuit::DipoleArray::electrically_long);

  py::class_<circuit::ImpedanceMatrix>(m, "ImpedanceMatrix")
      .def_readonly("z", &circuit::ImpedanceMatrix::z)
      .def("ports", &circuit::ImpedanceMatrix::ports);

  m.def("radiation_resistance", &circuit::radiation_resistance,
        py::arg("element_length"), py::arg("medium"));
  m.def("impedance_matrix", &circuit::impedance_matrix, py::arg("array"),
        py::arg("medium"));

  py::class_<circuit::LoadVector>(m, "LoadVector")
      .def_static("reactive", &circuit::LoadVector::reactive, py::arg("theta"))
      .def_readwrite("reactance", &circuit::LoadVector::reactance)
      .def_readwrite("resistance", &circuit::LoadVector::resistance)
      .def("purely_reactive", &circuit::LoadVector::purely_reactive)
      .def("impedance", &circuit::LoadVector::impedance);

  m.def("reflection_matrix", &circuit::reflection_matrix, py::arg("z"),
        py::arg("loads"));
  m.def("radiated_power", &circuit::radiated_power, py::arg("z"), py::arg("currents"));

  py::class_<circuit::CharacteristicLoads>(m, "CharacteristicLoads")
      .def_readonly("loads", &circuit::CharacteristicLoads::loads)
      .def_readonly("max_ratio_imag", &circuit::CharacteristicLoads::max_ratio_imag);
  m.def("characteristic_mode_loads", &circuit::characteristic_mode_loads, py::arg("z"),
        py::arg("target_current"));

  py::class_<circuit::DsaConfig>(m, "DsaConfig")
      .def(py::init([](int total, int active) {
             return circuit::DsaConfig{total, active};
           }),
           py::arg("total_ports"), py::arg("active_ports"))
      .def_readwrite("total_ports", &circuit::DsaConfig::total_ports)
      .def_readwrite("active_ports", &circuit::DsaConfig::active_ports)
      .def("selection", &circuit::DsaConfig::selection);

  m.def("dsa_forward", &circuit::dsa_forward, py::arg("z"), py::arg("loads"),
        py::arg("config"), py::arg("v_active"), py::arg("receive_coupling"));
  m.def("dsa_diagonalizing_target", &circuit::dsa_diagonalizing_target, py::arg("z"),
        py::arg("config"), py::arg("receive_coupling"), py::arg("power_target"));

  py::class_<circuit::DsaOptions>(m, "DsaOptions")
      .def(py::init<>())
      .def_readwrite("restarts", &circuit::DsaOptions::restarts)
      .def_readwrite("max_iterations", &circuit::DsaOptions::max_iterations)
      .def_readwrite("power_tolerance", &circuit::DsaOptions::power_tolerance)
      .def_readwrite("seed", &circuit::DsaOptions::seed);

  py::class_<circuit::DsaResult>(m, "DsaResult")
      .def_readonly("loads", &circuit::DsaResult::loads)
      .def_readonly("achieved", &circuit::DsaResult::achieved)
      .def_readonly("residual", &circuit::DsaResult::residual)
      .def_readonly("radiated_power", &circuit::DsaResult::radiated_power)
      .def_readonly("offdiag_leakage_db", &circuit::DsaResult::offdiag_leakage_db)
      .def_readonly("gain_loss_db", &circuit::DsaResult::gain_loss_db)
      .def_readonly("best_restart", &circuit::DsaResult::best_restart)
      .def_readonly("converged", &circuit::DsaResult::converged);
  m.def("dsa_optimize", &circuit::dsa_optimize, py::arg("z"), py::arg("config"),
        py::arg("receive_coupling"), py::arg("target"), py::arg("power_target"),
        py::arg("options") = circuit::DsaOptions{});

  // -------------------------------------------------------------------- sim
  py::class_<sim::SimStack>(m, "SimStack")
      .def(py::init<>())
      .def_readwrite("layers", &sim::SimStack::layers)
      .def_readwrite("atoms_per_layer", &sim::SimStack::atoms_per_layer)
      .def_readwrite("atom_pitch", &sim::SimStack::atom_pitch)
      .def_readwrite("layer_spacing", &sim::SimStack::layer_spacing)
      .def_readwrite("atom_area", &sim::SimStack::atom_area)
      .def_readwrite("readout_distance", &sim::SimStack::readout_distance)
      .def_readwrite("readout", &sim::SimStack::readout)
      .def("side", &sim::SimStack::side)
      .def("undersized", &sim::SimStack::undersized);

  py::class_<sim::PhaseTensor>(m, "PhaseTensor")
      .def(py::init([](const Eigen::MatrixXd& theta) { return sim::PhaseTensor{theta}; }),
           py::arg("theta"))
      .def_static("zeros", &sim::PhaseTensor::zeros, py::arg("layers"), py::arg("atoms"))
      .def_readwrite("theta", &sim::PhaseTensor::theta)
      .def("wrap", &sim::PhaseTensor::wrap);

  m.def("layer_propagation", &sim::layer_propagation, py::arg("stack"),
        py::arg("layer"), py::arg("medium"));
  m.def("readout_matrix", &sim::readout_matrix, py::arg("stack"),
        py::arg("n_antennas"), py::arg("medium"));

  py::class_<sim::SimModel>(m, "SimModel")
      .def_static("make", &sim::SimModel::make, py::arg("stack"), py::arg("medium"))
      .def_readonly("propagation", &sim::SimModel::propagation);

  m.def("sim_response", &sim::sim_response, py::arg("stack"), py::arg("phases"),
        py::arg("medium"));
  m.def("sim_end_to_end", &sim::end_to_end, py::arg("model"), py::arg("phases"));
  m.def(
      "sim_loss",
      [](const sim::SimModel& model, const sim::PhaseTensor& phases,
         const Eigen::MatrixXcd& target) {
        return sim::sim_loss(model, phases, target);
      },
      py::arg("model"), py::arg("phases"), py::arg("target"));

  py::class_<sim::TrainSchedule>(m, "TrainSchedule")
      .def(py::init<>())
      .def_readwrite("learning_rate", &sim::TrainSchedule::learning_rate)
      .def_readwrite("decay", &sim::TrainSchedule::decay)
      .def_readwrite("max_iterations", &sim::TrainSchedule::max_iterations)
      .def_readwrite("stop_decrement_rel", &sim::TrainSchedule::stop_decrement_rel);

  py::class_<sim::TrainResult>(m, "TrainResult")
      .def_readonly("phases", &sim::TrainResult::phases)
      .def_readonly("loss_history", &sim::TrainResult::loss_history)
      .def_readonly("iterations", &sim::TrainResult::iterations)
      .def_readonly("converged", &sim::TrainResult::converged);
  m.def(
      "sim_train",
      [](const sim::SimModel& model, const Eigen::MatrixXcd& target,
         const sim::TrainSchedule& schedule, std::uint64_t seed,
         std::optional<Eigen::MatrixXcd> input) {
        return sim::sim_train(model, target, schedule, seed, input ? &*input : nullptr);
      },
      py::arg("model"), py::arg("target"), py::arg("schedule"), py::arg("seed"),
      py::arg("input") = std::nullopt);

  m.def("dft_target", &sim::dft_target, py::arg("n_antennas"));
  m.def("doa_steering_target", &sim::doa_steering_target, py::arg("n_antennas"),
        py::arg("atoms"));
  m.def("grid_wave_dictionary", &sim::grid_wave_dictionary, py::arg("n_antennas"),
        py::arg("atoms"));
  m.def("plane_wave", &sim::plane_wave, py::arg("atoms"), py::arg("psi_x"),
        py::arg("psi_y"));
  m.def("grid_angle", &sim::grid_angle, py::arg("bin"), py::arg("side"));

  py::class_<sim::DoaEstimate>(m, "DoaEstimate")
      .def_readonly("psi_x", &sim::DoaEstimate::psi_x)
      .def_readonly("psi_y", &sim::DoaEstimate::psi_y)
      .def_readonly("bin_x", &sim::DoaEstimate::bin_x)
      .def_readonly("bin_y", &sim::DoaEstimate::bin_y)
      .def_readonly("energy", &sim::DoaEstimate::energy);
  m.def("doa_estimate", &sim::doa_estimate, py::arg("model"), py::arg("phases"),
        py::arg("wavefront"), py::arg("noise_power"), py::arg("snapshots"),
        py::arg("rng"));

  // -------------------------------------------------------------------- ris
  py::class_<ris::Angle>(m, "Angle")
      .def(py::init([](double elevation, double azimuth) {
             return ris::Angle{elevation, azimuth};
           }),
           py::arg("elevation"), py::arg("azimuth"))
      .def_readwrite("elevation", &ris::Angle::elevation)
      .def_readwrite("azimuth", &ris::Angle::azimuth)
      .def("ux", &ris::Angle::ux)
      .def("uy", &ris::Angle::uy)
      .def("unit", &ris::Angle::unit);

  py::class_<ris::RisPanel>(m, "RisPanel")
      .def_static("half_wavelength", &ris::RisPanel::half_wavelength, py::arg("side"),
                  py::arg("medium"))
      .def_readwrite("side", &ris::RisPanel::side)
      .def_readwrite("cell_spacing", &ris::RisPanel::cell_spacing)
      .def_readwrite("phases", &ris::RisPanel::phases)
      .def("cells", &ris::RisPanel::cells);

  m.def("anomalous_phase_profile", &ris::anomalous_phase_profile, py::arg("incident"),
        py::arg("desired"), py::arg("side"));
  m.def("configure_anomalous", &ris::configure_anomalous, py::arg("panel"),
        py::arg("incident"), py::arg("desired"), py::arg("medium"));
  m.def(
      "reflected_pattern",
      [](const ris::RisPanel& panel, const ris::Angle& incident,
         const std::vector<ris::Angle>& directions, const Medium& medium) {
        return ris::reflected_pattern(panel, incident, directions, medium);
      },
      py::arg("panel"), py::arg("incident"), py::arg("directions"), py::arg("medium"));

  py::enum_<ris::RisStructure>(m, "RisStructure")
      .value("diagonal", ris::RisStructure::diagonal)
      .value("nondiagonal_reciprocal", ris::RisStructure::nondiagonal_reciprocal)
      .value("nondiagonal_nonreciprocal", ris::RisStructure::nondiagonal_nonreciprocal);
  m.def("ris_dof", &ris::ris_dof, py::arg("cells"), py::arg("structure"));

  // -------------------------------------------------------------------- scm
  py::class_<scm::MimoChannel>(m, "MimoChannel")
      .def_readonly("h", &scm::MimoChannel::h)
      .def_readonly("singular_values", &scm::MimoChannel::singular_values)
      .def_readonly("top_right", &scm::MimoChannel::top_right)
      .def_readonly("seed", &scm::MimoChannel::seed);
  m.def("make_channel", &scm::make_channel, py::arg("ap_antennas"), py::arg("cells"),
        py::arg("rank"), py::arg("singular_values"), py::arg("seed"));

  py::class_<scm::Modulation>(m, "Modulation")
      .def_static("bpsk", &scm::Modulation::bpsk)
      .def_static("qpsk", &scm::Modulation::qpsk)
      .def_static("mpsk", &scm::Modulation::mpsk, py::arg("order"))
      .def_readonly("order", &scm::Modulation::order)
      .def("symbol_phase", &scm::Modulation::symbol_phase, py::arg("index"))
      .def("detect", &scm::Modulation::detect, py::arg("phase"));

  py::class_<scm::ScmParams>(m, "ScmParams")
      .def(py::init<>())
      .def_readwrite("ap_antennas", &scm::ScmParams::ap_antennas)
      .def_readwrite("cells", &scm::ScmParams::cells)
      .def_readwrite("tx_power", &scm::ScmParams::tx_power)
      .def_readwrite("gain", &scm::ScmParams::gain)
      .def_readwrite("sensor_noise", &scm::ScmParams::sensor_noise)
      .def_readwrite("ap_noise", &scm::ScmParams::ap_noise)
      .def_readwrite("modulation", &scm::ScmParams::modulation);

  py::class_<scm::LinkTrajectory>(m, "LinkTrajectory")
      .def_readonly("snr_db", &scm::LinkTrajectory::snr_db)
      .def_readonly("alignment", &scm::LinkTrajectory::alignment)
      .def_readonly("decision", &scm::LinkTrajectory::decision)
      .def_readonly("detected_phase", &scm::LinkTrajectory::detected_phase)
      .def_readonly("detected_symbol", &scm::LinkTrajectory::detected_symbol)
      .def_readonly("sent_symbol", &scm::LinkTrajectory::sent_symbol)
      .def_readonly("symbol_errors", &scm::LinkTrajectory::symbol_errors)
      .def_readonly("final_beam", &scm::LinkTrajectory::final_beam);
  m.def(
      "run_link",
      [](const scm::MimoChannel& channel, const scm::ScmParams& params,
         const std::vector<double>& packet, std::uint64_t seed) {
        return scm::run_link(channel, params, packet, seed);
      },
      py::arg("channel"), py::arg("params"), py::arg("packet"), py::arg("seed"));
  m.def("beam_snr", &scm::beam_snr, py::arg("channel"), py::arg("params"),
        py::arg("beam"));
  m.def("bootstrap_snr_db", &scm::bootstrap_snr_db, py::arg("snr_max_db"),
        py::arg("ap_antennas"));

  // -------------------------------------------------------------------- rng
  py::class_<RandomStream>(m, "RandomStream")
      .def(py::init([](const std::string& label, std::uint64_t seed,
                       std::uint64_t trial) {
             return RandomStream(label, seed, trial);
           }),
           py::arg("label"), py::arg("seed"), py::arg("trial") = 0)
      .def("uniform", py::overload_cast<>(&RandomStream::uniform))
      .def("normal", &RandomStream::normal)
      .def("complex_normal_vector", &RandomStream::complex_normal_vector, py::arg("n"))
      .def("unit_vector", &RandomStream::unit_vector, py::arg("n"));
}
