#pragma once

#include "lbpcert/bound_matrix.hpp"
#include "lbpcert/bp.hpp"
#include "lbpcert/certificate.hpp"
#include "lbpcert/certify_binary.hpp"
#include "lbpcert/certify_general.hpp"
#include "lbpcert/experiments.hpp"
#include "lbpcert/factor_graph.hpp"
#include "lbpcert/rival_bounds.hpp"
#include "lbpcert/simplex.hpp"
#include "lbpcert/strength.hpp"
#include "lbpcert/uai_io.hpp"
