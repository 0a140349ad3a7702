#pragma once

/// Umbrella header: the full rate-constrained optimal-control toolkit.

#include "ratepmp/certificate.hpp"
#include "ratepmp/convex_set.hpp"
#include "ratepmp/cost.hpp"
#include "ratepmp/defaults.hpp"
#include "ratepmp/dynamics.hpp"
#include "ratepmp/existence.hpp"
#include "ratepmp/experiment.hpp"
#include "ratepmp/finite_diff.hpp"
#include "ratepmp/json_io.hpp"
#include "ratepmp/lifting.hpp"
#include "ratepmp/log.hpp"
#include "ratepmp/ocp.hpp"
#include "ratepmp/oracle.hpp"
#include "ratepmp/output.hpp"
#include "ratepmp/qp.hpp"
#include "ratepmp/transcription.hpp"
