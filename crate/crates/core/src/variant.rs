//! The eight network variants and what each one implies for the environment.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::perception::ObservationLayout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NetworkVariant {
    /// Centering reward only.
    #[serde(rename = "1.1")]
    Single1,
    /// Monocular pose-error reward.
    #[serde(rename = "1.2")]
    Single2,
    /// Weighted monocular pose-error reward.
    #[serde(rename = "1.3")]
    Single3,
    /// Centering plus weighted monocular pose error.
    #[serde(rename = "1.4")]
    Single4,
    /// Centering, discrete collision and triangulation rewards; static subject, no yaw control.
    #[serde(rename = "2.1")]
    Multi1,
    /// Centering, discrete collision and multi-view pose rewards; static subject, no yaw control.
    #[serde(rename = "2.2")]
    Multi2,
    /// Centering, continuous collision and multi-view pose rewards.
    #[serde(rename = "2.3")]
    Multi3,
    /// Centering and multi-view pose rewards with environment-level avoidance.
    #[serde(rename = "2.4")]
    Multi4,
}

impl NetworkVariant {
    pub const ALL: [NetworkVariant; 8] = [
        NetworkVariant::Single1,
        NetworkVariant::Single2,
        NetworkVariant::Single3,
        NetworkVariant::Single4,
        NetworkVariant::Multi1,
        NetworkVariant::Multi2,
        NetworkVariant::Multi3,
        NetworkVariant::Multi4,
    ];

    pub fn label(self) -> &'static str {
        match self {
            NetworkVariant::Single1 => "1.1",
            NetworkVariant::Single2 => "1.2",
            NetworkVariant::Single3 => "1.3",
            NetworkVariant::Single4 => "1.4",
            NetworkVariant::Multi1 => "2.1",
            NetworkVariant::Multi2 => "2.2",
            NetworkVariant::Multi3 => "2.3",
            NetworkVariant::Multi4 => "2.4",
        }
    }

    pub fn is_multi_agent(self) -> bool {
        matches!(
            self,
            NetworkVariant::Multi1
                | NetworkVariant::Multi2
                | NetworkVariant::Multi3
                | NetworkVariant::Multi4
        )
    }

    pub fn agents(self) -> usize {
        if self.is_multi_agent() {
            2
        } else {
            1
        }
    }

    pub fn static_subject(self) -> bool {
        matches!(self, NetworkVariant::Multi1 | NetworkVariant::Multi2)
    }

    /// Variants without yaw control rely on a yaw controller that keeps the
    /// subject on the optical axis.
    pub fn yaw_control(self) -> bool {
        !self.static_subject()
    }

    pub fn action_dim(self) -> usize {
        if self.yaw_control() {
            4
        } else {
            3
        }
    }

    pub fn potential_field(self) -> bool {
        self == NetworkVariant::Multi4
    }

    pub fn observation_layout(self) -> ObservationLayout {
        ObservationLayout {
            neighbor: self.is_multi_agent(),
            velocity: !self.static_subject(),
        }
    }

    pub fn hidden_width(self) -> usize {
        if self.is_multi_agent() {
            256
        } else {
            64
        }
    }

    pub fn uses_monocular(self) -> bool {
        matches!(
            self,
            NetworkVariant::Single2 | NetworkVariant::Single3 | NetworkVariant::Single4
        )
    }
}

impl fmt::Display for NetworkVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for NetworkVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NetworkVariant::ALL
            .into_iter()
            .find(|v| v.label() == s)
            .ok_or_else(|| format!("unknown network variant '{s}' (expected 1.1-1.4 or 2.1-2.4)"))
    }
}
