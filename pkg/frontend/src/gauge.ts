/**
 * Speedometer: a 0-240 MPH dial with a needle linear in MPH.
 *
 * The dial sweeps 270 degrees clockwise from the lower-left (135deg in
 * canvas angle convention) to the lower-right (405deg).
 */

export const GAUGE_MIN_MPH = 0;
export const GAUGE_MAX_MPH = 240;
export const DIAL_START_DEG = 135;
export const DIAL_SWEEP_DEG = 270;

export function clampMph(mph: number): number {
  if (Number.isNaN(mph)) return GAUGE_MIN_MPH;
  return Math.min(GAUGE_MAX_MPH, Math.max(GAUGE_MIN_MPH, mph));
}

/** Needle angle in canvas degrees; linear over the dial range. */
export function needleAngleDeg(mph: number): number {
  const fraction = clampMph(mph) / GAUGE_MAX_MPH;
  return DIAL_START_DEG + fraction * DIAL_SWEEP_DEG;
}

const toRadians = (deg: number) => (deg * Math.PI) / 180;

export function drawGauge(
  ctx: CanvasRenderingContext2D,
  speedMph: number,
  size: number,
): void {
  const center = size / 2;
  const radius = size * 0.42;
  ctx.clearRect(0, 0, size, size);

  // dial arc
  ctx.lineWidth = size * 0.02;
  ctx.strokeStyle = "#445";
  ctx.beginPath();
  ctx.arc(
    center,
    center,
    radius,
    toRadians(DIAL_START_DEG),
    toRadians(DIAL_START_DEG + DIAL_SWEEP_DEG),
  );
  ctx.stroke();

  // ticks and labels every 20 MPH
  ctx.fillStyle = "#cdd3e0";
  ctx.strokeStyle = "#8891a8";
  ctx.lineWidth = Math.max(1, size * 0.006);
  ctx.font = `${Math.round(size * 0.055)}px system-ui, sans-serif`;
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  for (let mph = GAUGE_MIN_MPH; mph <= GAUGE_MAX_MPH; mph += 20) {
    const angle = toRadians(needleAngleDeg(mph));
    const major = mph % 40 === 0;
    const inner = radius * (major ? 0.86 : 0.92);
    ctx.beginPath();
    ctx.moveTo(center + inner * Math.cos(angle), center + inner * Math.sin(angle));
    ctx.lineTo(center + radius * Math.cos(angle), center + radius * Math.sin(angle));
    ctx.stroke();
    if (major) {
      const labelRadius = radius * 0.72;
      ctx.fillText(
        String(mph),
        center + labelRadius * Math.cos(angle),
        center + labelRadius * Math.sin(angle),
      );
    }
  }

  // needle
  const needleAngle = toRadians(needleAngleDeg(speedMph));
  ctx.strokeStyle = "#e8493d";
  ctx.lineWidth = size * 0.015;
  ctx.beginPath();
  ctx.moveTo(center, center);
  ctx.lineTo(
    center + radius * 0.8 * Math.cos(needleAngle),
    center + radius * 0.8 * Math.sin(needleAngle),
  );
  ctx.stroke();
  ctx.fillStyle = "#e8493d";
  ctx.beginPath();
  ctx.arc(center, center, size * 0.03, 0, Math.PI * 2);
  ctx.fill();

  // numeric readout
  ctx.fillStyle = "#f4f6fb";
  ctx.font = `bold ${Math.round(size * 0.1)}px system-ui, sans-serif`;
  ctx.fillText(`${clampMph(speedMph).toFixed(1)}`, center, center + radius * 0.55);
  ctx.font = `${Math.round(size * 0.05)}px system-ui, sans-serif`;
  ctx.fillStyle = "#8891a8";
  ctx.fillText("MPH", center, center + radius * 0.72);
}
