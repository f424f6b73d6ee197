#pragma once

#include "sparseseg/block_segmenter.hpp"
#include "sparseseg/dct_basis.hpp"
#include "sparseseg/evaluation.hpp"
#include "sparseseg/image_io.hpp"
#include "sparseseg/lasso_admm.hpp"
