#ifndef SIGTOOLS_SIGTOOLS_HPP
#define SIGTOOLS_SIGTOOLS_HPP

#include "sigtools/development.hpp"
#include "sigtools/errors.hpp"
#include "sigtools/expected_sig.hpp"
#include "sigtools/learn.hpp"
#include "sigtools/lie.hpp"
#include "sigtools/logode.hpp"
#include "sigtools/stream.hpp"
#include "sigtools/tensor.hpp"

#endif // SIGTOOLS_SIGTOOLS_HPP
