use serde::Serialize;

use super::{Arch, CostCoefficients, PlatformSpec, ResourceEstimate};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceleratorCost {
    pub arch: Arch,
    pub shell: ResourceEstimate,
    /// Layer engines only: the sum (DF) or element-wise maximum (MO).
    pub engines: ResourceEstimate,
    /// Offload control overhead; zero for DF.
    pub control: ResourceEstimate,
    pub total: ResourceEstimate,
}

impl AcceleratorCost {
    /// Engines plus control, without the shell.
    pub fn arch_only(&self) -> ResourceEstimate {
        self.engines + self.control
    }
}

pub fn accelerator_cost(
    layers: &[ResourceEstimate],
    arch: Arch,
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
) -> AcceleratorCost {
    let shell = ResourceEstimate::from(platform.shell);
    let (engines, control) = match arch {
        Arch::Df => (layers.iter().copied().sum(), ResourceEstimate::ZERO),
        Arch::Mo => (layers.iter().copied().fold(ResourceEstimate::ZERO, ResourceEstimate::max), coeffs.mo_control),
    };
    AcceleratorCost { arch, shell, engines, control, total: shell + engines + control }
}
