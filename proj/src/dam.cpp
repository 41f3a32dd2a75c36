#include "trapan/dam.hpp"

#include <cmath>
#include <string>

#include "trapan/errors.hpp"
#include "trapan/tencrop.hpp"

namespace trapan {

RasterImage dam_forward(const DegradationNet& net, const RasterImage& ms) {
    DegradationNet::Activations acts;
    return net.forward(ms, acts);
}

DamResult train_dam(const ImagePair& pair, std::span<const MtfKernel> ms_kernels,
                    const MtfKernel& pan_kernel, const DamConfig& cfg) {
    pair.validate();
    if (cfg.epochs < 1) throw DomainError("DAM needs at least one epoch");
    if (cfg.batch_size != 1)
        throw DomainError("DAM is defined for batch size 1 (one triple per step)");

    const WaldPair wald = wald_pair(pair.ms, pair.pan, pair.ratio, ms_kernels, pan_kernel);
    // The MLP consumes MS-resolution spectra on the same grid as the
    // reduced PAN; the pair geometry guarantees h = H/r.
    if (wald.lrpan.height != pair.ms.height || wald.lrpan.width != pair.ms.width)
        throw ShapeError("reduced PAN grid does not match the MS grid");

    const auto triples =
        aligned_ten_crop(pair.ms, wald.lrms, wald.lrpan, pair.ratio, cfg.crop_frac);

    Rng rng(cfg.seed);
    Rng init_rng = rng.fork("dam-init");
    DamResult result{DegradationNet(pair.ms.bands), {}};
    result.net.init_weights(init_rng);
    AdamOptimizer opt(cfg.lr);
    const auto params = result.net.params();

    result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (const CropTriple& t : triples) {
            const RasterImage pred = result.net.forward(t.ms);
            const double loss = mse(pred.data, t.lrpan.data);
            if (!std::isfinite(loss))
                throw NumericError("non-finite DAM loss at epoch " + std::to_string(epoch));
            RasterImage grad(pred.height, pred.width, 1);
            mse_backward(pred.data, t.lrpan.data, 1.0, grad.data);
            result.net.backward(grad);
            opt.step(params);
            epoch_loss += loss;
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(triples.size()));
    }
    return result;
}

}  // namespace trapan
