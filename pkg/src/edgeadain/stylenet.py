"""Edge-AdaIN network: VGG-style encoder, CBAM, AdaIN, edge fusion, decoder.

Feature maps are ``N x C x H x W`` tensors. The encoder is frozen; the
decoder and CBAM are the trainable parts.
"""
from collections import OrderedDict

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .core import DEFAULT_EPS, TAPS, channel_stats, check_image, image_to_tensor, tensor_to_image, to_rgb
from .edge import EdgeMap
from .weights import WeightFileError, load_container, save_container

VGG19_WIDTHS = (64, 128, 256, 512)
TINY_WIDTHS = (32, 64, 128, 256)
LEAKY_SLOPE = 0.01
CBAM_REDUCTION = 16
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

# torchvision vgg19().features indices for the layers we keep
_TORCHVISION_INDEX = {
    "conv1_1": 0, "conv1_2": 2, "conv2_1": 5, "conv2_2": 7, "conv3_1": 10,
    "conv3_2": 12, "conv3_3": 14, "conv3_4": 16, "conv4_1": 19,
}


def encoder_layout(widths):
    w1, w2, w3, w4 = widths
    return [
        ("conv1_1", 3, w1), ("conv1_2", w1, w1), "pool",
        ("conv2_1", w1, w2), ("conv2_2", w2, w2), "pool",
        ("conv3_1", w2, w3), ("conv3_2", w3, w3), ("conv3_3", w3, w3), ("conv3_4", w3, w3), "pool",
        ("conv4_1", w3, w4),
    ]


def decoder_layout(widths):
    w1, w2, w3, w4 = widths
    return [
        ("conv4_1", w4, w3), "up",
        ("conv3_4", w3, w3), ("conv3_3", w3, w3), ("conv3_2", w3, w3), ("conv3_1", w3, w2), "up",
        ("conv2_2", w2, w2), ("conv2_1", w2, w1), "up",
        ("conv1_2", w1, w1), ("conv1_1", w1, 3),
    ]


def conv3x3(x, conv):
    return conv(F.pad(x, (1, 1, 1, 1), mode="reflect"))


class Encoder(nn.Module):
    """VGG-19 prefix through relu4_1 with reflection padding."""

    def __init__(self, widths=VGG19_WIDTHS):
        super().__init__()
        self.widths = tuple(widths)
        self.layout = encoder_layout(self.widths)
        self.convs = nn.ModuleDict(
            (name, nn.Conv2d(cin, cout, 3)) for name, cin, cout in (s for s in self.layout if s != "pool")
        )
        self.requires_grad_(False)

    def forward(self, x):
        """Return the four tap activations relu1_1 .. relu4_1."""
        taps = []
        for step in self.layout:
            if step == "pool":
                x = F.max_pool2d(x, 2)
                continue
            name = step[0]
            x = F.relu(conv3x3(x, self.convs[name]))
            if name.endswith("_1"):
                taps.append(x)
        return taps


class Decoder(nn.Module):
    """Mirror of the encoder with nearest upsampling and LeakyReLU."""

    def __init__(self, widths=VGG19_WIDTHS, negative_slope=LEAKY_SLOPE):
        super().__init__()
        self.widths = tuple(widths)
        self.negative_slope = negative_slope
        self.layout = decoder_layout(self.widths)
        self.convs = nn.ModuleDict(
            (name, nn.Conv2d(cin, cout, 3)) for name, cin, cout in (s for s in self.layout if s != "up")
        )

    def forward(self, x):
        last = self.layout[-1][0]
        for step in self.layout:
            if step == "up":
                x = F.interpolate(x, scale_factor=2, mode="nearest")
                continue
            x = conv3x3(x, self.convs[step[0]])
            if step[0] != last:
                x = F.leaky_relu(x, self.negative_slope)
        return x


class CBAM(nn.Module):
    """Channel attention followed by spatial attention (multiplicative gates)."""

    def __init__(self, channels, reduction=CBAM_REDUCTION, kernel_size=7):
        super().__init__()
        hidden = max(1, channels // reduction)
        self.channels = channels
        self.fc1 = nn.Linear(channels, hidden, bias=False)
        self.fc2 = nn.Linear(hidden, channels, bias=False)
        self.spatial = nn.Conv2d(2, 1, kernel_size, padding=kernel_size // 2, bias=False)

    def channel_mask(self, x):
        avg = x.mean(dim=(2, 3))
        mx = x.amax(dim=(2, 3))
        logits = self.fc2(F.relu(self.fc1(avg))) + self.fc2(F.relu(self.fc1(mx)))
        return torch.sigmoid(logits)[:, :, None, None]

    def spatial_mask(self, x):
        pooled = torch.cat([x.mean(dim=1, keepdim=True), x.amax(dim=1, keepdim=True)], dim=1)
        return torch.sigmoid(self.spatial(pooled))

    def forward(self, x):
        if x.shape[1] != self.channels:
            raise ValueError(f"CBAM expects {self.channels} channels, got {x.shape[1]}")
        x = x * self.channel_mask(x)
        return x * self.spatial_mask(x)


class EdgeAdaIN(nn.Module):
    """Container for the three weight groups; see :func:`stylize` for the forward pass."""

    def __init__(self, widths=VGG19_WIDTHS, negative_slope=LEAKY_SLOPE):
        super().__init__()
        self.widths = tuple(widths)
        self.encoder = Encoder(widths)
        self.cbam = CBAM(widths[-1])
        self.decoder = Decoder(widths, negative_slope)

    def trainable_parameters(self):
        return list(self.cbam.parameters()) + list(self.decoder.parameters())


def _seeded_init(module, rng, bias_scale=0.05):
    with torch.no_grad():
        for name, p in module.named_parameters():
            if name.endswith("bias"):
                vals = rng.normal(0.0, bias_scale, size=p.shape)
            else:
                fan_in = int(np.prod(p.shape[1:]))
                vals = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=p.shape)
            p.copy_(torch.from_numpy(vals.astype(np.float32)))


def build_network(variant="tiny", seed=0, encoder_dir=None):
    """Create a network with seeded weights.

    ``variant="tiny"`` draws a frozen random encoder at half VGG width;
    ``variant="vgg19"`` loads the encoder from a weight container (see
    :func:`convert_torchvision_vgg19`).
    """
    rng = np.random.default_rng(seed)
    if variant == "tiny":
        net = EdgeAdaIN(TINY_WIDTHS)
        _seeded_init(net.encoder, rng)
    elif variant == "vgg19":
        if encoder_dir is None:
            raise ValueError("the vgg19 variant needs an encoder weight container")
        net = EdgeAdaIN(VGG19_WIDTHS)
        _seeded_init(net.encoder, rng)
        _load_into(net.encoder, load_container(encoder_dir), prefix="encoder.")
    else:
        raise ValueError(f"unknown encoder variant {variant!r}")
    _seeded_init(net.cbam, rng)
    _seeded_init(net.decoder, rng)
    net.encoder.requires_grad_(False)
    return net


def widths_from_tensors(tensors):
    try:
        return tuple(int(tensors[f"encoder.convs.conv{i}_1.weight"].shape[0]) for i in range(1, 5))
    except KeyError as exc:
        raise WeightFileError(f"missing layer {exc.args[0]!r}") from None


def _load_into(module, tensors, prefix=""):
    state = module.state_dict()
    new = OrderedDict()
    for key, ref in state.items():
        name = prefix + key
        if name not in tensors:
            raise WeightFileError(f"missing layer {name!r}")
        arr = tensors[name]
        if tuple(arr.shape) != tuple(ref.shape):
            raise WeightFileError(f"layer {name!r}: shape {tuple(arr.shape)} != expected {tuple(ref.shape)}")
        new[key] = torch.from_numpy(np.array(arr, dtype=np.float32))
    module.load_state_dict(new)


def save_network(net, directory):
    save_container(directory, net.state_dict())


def load_network(directory, negative_slope=LEAKY_SLOPE):
    tensors = load_container(directory)
    net = EdgeAdaIN(widths_from_tensors(tensors), negative_slope)
    _load_into(net, tensors)
    net.encoder.requires_grad_(False)
    return net


def convert_torchvision_vgg19(state_dict, directory):
    """Write torchvision ``vgg19`` weights as an encoder container.

    ImageNet input normalisation is folded into conv1_1 so the encoder takes
    raw [0, 1] RGB. The fold is exact because reflection padding commutes
    with a per-channel affine map.
    """
    out = OrderedDict()
    mean = torch.tensor(IMAGENET_MEAN, dtype=torch.float64)
    std = torch.tensor(IMAGENET_STD, dtype=torch.float64)
    for name, idx in _TORCHVISION_INDEX.items():
        w = torch.as_tensor(state_dict[f"features.{idx}.weight"]).double()
        b = torch.as_tensor(state_dict[f"features.{idx}.bias"]).double()
        if name == "conv1_1":
            b = b - (w * (mean / std)[None, :, None, None]).sum(dim=(1, 2, 3))
            w = w / std[None, :, None, None]
        out[f"encoder.convs.{name}.weight"] = w.float()
        out[f"encoder.convs.{name}.bias"] = b.float()
    save_container(directory, out)


# ---- pipeline ops -------------------------------------------------------

def _check_multiple_of_8(x):
    h, w = x.shape[-2:]
    if h % 8 or w % 8:
        raise ValueError(f"spatial dims must be multiples of 8, got {h}x{w}; pad first")


def _as_input(img):
    if isinstance(img, torch.Tensor):
        return img if img.dim() == 4 else img[None]
    return image_to_tensor(to_rgb(img))


def encode_taps(img, encoder):
    x = _as_input(img)
    if x.shape[1] != 3:
        raise ValueError(f"encoder expects 3 input channels, got {x.shape[1]}")
    _check_multiple_of_8(x)
    return encoder(x)


def encode(img, encoder):
    return encode_taps(img, encoder)[-1]


def cbam_refine(fm, cbam):
    return cbam(fm)


def adain(content, style, eps=DEFAULT_EPS):
    """Re-normalise each content channel to the style channel's mean and std."""
    if content.shape[-3] != style.shape[-3]:
        raise ValueError(f"channel mismatch: {content.shape[-3]} vs {style.shape[-3]}")
    c_mean, c_std = channel_stats(content, eps)
    s_mean, s_std = channel_stats(style, eps)
    c_mean, c_std = c_mean[..., None, None], c_std[..., None, None]
    s_mean, s_std = s_mean[..., None, None], s_std[..., None, None]
    return s_std * ((content - c_mean) / c_std) + s_mean


def fuse(adacs, edge_fm, edge_weight=1.0):
    if adacs.shape != edge_fm.shape:
        raise ValueError(f"shape mismatch: {tuple(adacs.shape)} vs {tuple(edge_fm.shape)}")
    return adacs + edge_weight * edge_fm


def decode(fm, decoder):
    expected = decoder.widths[-1]
    if fm.dim() != 4 or fm.shape[1] != expected:
        raise ValueError(f"decoder expects N x {expected} x H x W input, got {tuple(fm.shape)}")
    return decoder(fm)


def forward_features(net, content, style, edge_rgb, edge_weight=1.0):
    """Shared forward for training and inference on padded tensors.

    Returns ``(output, adacs, style_taps, edge_taps)``.
    """
    content_fm = encode(content, net.encoder)
    style_taps = encode_taps(style, net.encoder)
    edge_taps = encode_taps(edge_rgb, net.encoder)
    adacs = adain(cbam_refine(content_fm, net.cbam), style_taps[-1])
    out = decode(fuse(adacs, edge_taps[-1], edge_weight), net.decoder)
    return out, adacs, style_taps, edge_taps


def pad_to_multiple(img, multiple=8):
    """Reflect-pad bottom/right so both dims divide ``multiple``."""
    img = check_image(img)
    h, w = img.shape[:2]
    ph, pw = (-h) % multiple, (-w) % multiple
    if ph or pw:
        img = np.pad(img, ((0, ph), (0, pw), (0, 0)), mode="symmetric")
    return img, (h, w)


def stylize(content, style, edge, net, edge_weight=1.0):
    """Stylised rendering of ``content`` in the strokes of ``style``.

    ``edge`` is an :class:`~edgeadain.edge.EdgeMap` (or H x W array) matching
    the content size. The raw decoder output is returned, unclamped.
    """
    content = to_rgb(content)
    edge_data = edge.data if isinstance(edge, EdgeMap) else np.asarray(edge)
    if edge_data.shape[:2] != content.shape[:2]:
        raise ValueError("edge map size mismatch")
    c_pad, (h, w) = pad_to_multiple(content)
    s_pad, _ = pad_to_multiple(to_rgb(style))
    e_pad, _ = pad_to_multiple(to_rgb(edge_data.reshape(h, w, 1)))
    with torch.no_grad():
        out, *_ = forward_features(net, c_pad, s_pad, e_pad, edge_weight)
    return tensor_to_image(out)[:h, :w]
